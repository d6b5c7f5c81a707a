//! Provenance header written at the top of every output file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, String>,
    /// (path, sha256 hex) of each input file.
    pub inputs: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
}

impl RunManifest {
    pub fn new(command: &str, params: &BTreeMap<String, String>) -> Self {
        Self {
            command: command.to_string(),
            params: params.clone(),
            inputs: Vec::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|source| crate::error::CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.inputs
            .push((path.display().to_string(), sha256_hex(&bytes)));
        Ok(())
    }

    /// `#`-prefixed header block.
    pub fn header(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# semilinear {}", self.version).unwrap();
        writeln!(out, "# command = {}", self.command).unwrap();
        writeln!(out, "# timestamp = {}", self.timestamp).unwrap();
        if let Some(seed) = self.seed {
            writeln!(out, "# seed = {seed}").unwrap();
        }
        for (k, v) in &self.params {
            writeln!(out, "# param {k} = {v}").unwrap();
        }
        for (p, d) in &self.inputs {
            writeln!(out, "# input {p} sha256 = {d}").unwrap();
        }
        out
    }

    pub fn wrap(&self, body: &str) -> String {
        let mut out = self.header();
        out.push_str(body);
        out
    }
}

/// Lines of `text` that are not part of a `#` header.
pub fn body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn header_and_body() {
        let mut params = BTreeMap::new();
        params.insert("sigma".to_string(), "2".to_string());
        let mut m = RunManifest::new("limit", &params);
        m.seed = Some(3);
        let text = m.wrap("n,value\n1,2\n");
        assert!(text.starts_with("# semilinear "));
        assert!(text.contains("# param sigma = 2\n"));
        assert!(text.contains("# seed = 3\n"));
        assert_eq!(body(&text), "n,value\n1,2\n");
    }
}
