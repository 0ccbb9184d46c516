use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The measured result has zero probability under every prior point.
    #[error("result {result} is inconsistent with the prior support")]
    InconsistentResult { result: String },

    #[error(
        "exact enumeration of 2^{digits} results exceeds the limit of 2^{limit}; use sampling mode"
    )]
    Capacity { digits: u32, limit: u32 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("expansion regime violated: {0}")]
    RegimeViolation(String),

    #[error("out of range: {0}")]
    Range(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
