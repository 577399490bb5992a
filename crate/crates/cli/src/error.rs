use thiserror::Error;

/// Failures that map onto the documented process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable or malformed files, invalid parameters.
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    NonConvergence(String),

    #[error("{0}")]
    OracleGate(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::OracleGate(_) => 4,
        }
    }
}

impl From<cio_core::Error> for CliError {
    fn from(err: cio_core::Error) -> Self {
        match err {
            cio_core::Error::NonConvergence { .. } => CliError::NonConvergence(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
