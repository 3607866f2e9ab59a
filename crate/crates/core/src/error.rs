//! Crate error type.

use thiserror::Error;

/// Errors produced by operator construction, sampling and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimension or shape precondition was violated.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A scalar parameter was outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A factorization or iterative solve failed beyond recovery.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Configuration file or CLI value could not be interpreted.
    #[error("config error: {0}")]
    Config(String),

    /// Underlying file-system failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, got: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            got,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
