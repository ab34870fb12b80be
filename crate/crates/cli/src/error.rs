use std::fmt;

use twolevel_core::Error;

/// Failures mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1.
    Usage(String),
    /// Exit 2: resource limits and validation.
    Validation(String),
    /// Exit 3.
    Io(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Json(_) | Error::Checkpoint(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}
