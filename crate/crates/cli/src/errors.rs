//! Error type mapping every failure onto the process exit codes:
//! 1 usage/parse, 2 data-domain, 3 I/O.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, malformed config or file contents.
    Usage(String),
    /// Domain errors: invalid dimensions, undefined SNR, solver rejections.
    Data(String),
    /// Operating-system level I/O failures.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gradshop_core::Error> for CliError {
    fn from(e: gradshop_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("config parse error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
