//! CLI error taxonomy. Every failure is classified so the process exit
//! code tells scripts what went wrong: 2 = configuration, 3 = numerics,
//! 4 = I/O.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Classifies an engine error, prefixing the pipeline stage it came
    /// from.
    pub fn from_stage(stage: &str, e: slp_core::Error) -> Self {
        use slp_core::Error as E;
        let msg = format!("[{stage}] {e}");
        match e {
            E::DimensionMismatch(_) | E::InvalidArgument(_) | E::Parse(_) => CliError::Config(msg),
            E::Io(_) => CliError::Io(msg),
            _ => CliError::Numeric(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
