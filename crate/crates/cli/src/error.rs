use permagg::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] Error),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    /// Process exit code.
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    /// Message without the category prefix.
    pub fn message(&self) -> String {
        match self {
            CliError::Config(s) | CliError::Io(s) | CliError::Validation(s) => s.clone(),
            CliError::Numerical(e) => e.to_string(),
        }
    }
}
