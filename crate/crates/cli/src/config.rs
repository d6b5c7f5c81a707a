//! `key = value` configuration files and flag > config > default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{usage, CliError, Result};

#[derive(Debug, Default, Clone)]
pub struct Settings {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

/// Parses `key = value` lines; `#` starts a comment and blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Config {
                line: i + 1,
                message: "empty key".into(),
            });
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config {
                line: i + 1,
                message: format!("`{key}` set twice"),
            });
        }
    }
    Ok(out)
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => parse_config(&crate::read_text(p)?)?,
            None => BTreeMap::new(),
        };
        Ok(Self {
            file,
            resolved: BTreeMap::new(),
        })
    }

    pub fn from_map(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            resolved: BTreeMap::new(),
        }
    }

    fn file_value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.file
            .get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|e| usage(format!("config `{key} = {raw}`: {e}")))
            })
            .transpose()
    }

    /// Flag if given, else the config file, else `default`; records the result.
    pub fn opt<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?.or(default),
        };
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    pub fn value<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.opt(key, flag, Some(default))?.expect("default supplied"))
    }

    pub fn require<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T::Err: Display,
    {
        self.opt(key, flag, None)?
            .ok_or_else(|| usage(format!("missing required `--{key}` (flag or config)")))
    }

    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        let v = flag || self.file_value::<bool>(key)?.unwrap_or(false);
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}
