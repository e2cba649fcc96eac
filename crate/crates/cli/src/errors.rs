//! CLI error type with the process exit code each class maps to.

use ridgesplit_core::Error as CoreError;

/// Errors surfaced by the command-line layer. Exit codes: configuration
/// errors exit 2, data/file errors exit 3, numeric failures exit 4.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io { .. } | CoreError::Parse { .. } => CliError::Data(e.to_string()),
            CoreError::NonFinite(_)
            | CoreError::InfiniteEffectiveDimension { .. }
            | CoreError::UndefinedRatio(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
