use std::path::PathBuf;

use semilinear_core::ErrorKind;

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFIED_FALSE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const DOMAIN: i32 = 3;
    pub const NUMERIC: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] semilinear_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Input => exit::INPUT,
                ErrorKind::Domain => exit::DOMAIN,
                ErrorKind::Verification => exit::VERIFIED_FALSE,
                ErrorKind::Numeric => exit::NUMERIC,
            },
            CliError::Io { .. } | CliError::Usage(_) | CliError::Config { .. } => exit::INPUT,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
