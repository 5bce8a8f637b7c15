use thiserror::Error;

/// Errors raised by the numerical kernels, oracles and optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    /// A factorization broke down; `retriable` is set when a fresh random draw may succeed.
    #[error("numerical failure: {message}")]
    Numerical { message: String, retriable: bool },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("preconditioner used before its first update")]
    NotInitialized,
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>) -> Self {
        Error::Numerical {
            message: message.into(),
            retriable: false,
        }
    }

    pub(crate) fn dims(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            actual,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
