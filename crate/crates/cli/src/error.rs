use qwkt_core::Error as CoreError;
use thiserror::Error;

/// Failure of a command, carrying the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration or flags: exit 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input file missing, unreadable or violating its schema: exit 3.
    #[error("input error: {0}")]
    Input(String),
    /// Estimation or numerical failure: exit 4.
    #[error("estimation error: {0}")]
    Estimation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Estimation(_) => 4,
        }
    }

    /// Maps a core error raised while building models from flags.
    pub fn config(e: CoreError) -> Self {
        CliError::Config(e.to_string())
    }

    /// Maps a core error raised while estimating.
    pub fn estimation(e: CoreError) -> Self {
        match e {
            CoreError::Input(m) => CliError::Input(m),
            other => CliError::Estimation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
