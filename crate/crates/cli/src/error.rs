use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{0}")]
    Regime(String),

    #[error(transparent)]
    Core(#[from] spinladder::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Regime(_) => 4,
            CliError::Core(spinladder::Error::RegimeViolation(_)) => 4,
            CliError::Core(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}
