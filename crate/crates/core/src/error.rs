use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the three failure classes a caller can act on:
/// malformed input, arguments outside an operation's domain, and
/// enumeration guards that would make a computation infeasible.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("invalid permutation: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{what} exceeds guard ({size} > {limit}); {hint}")]
    Resource { what: String, size: usize, limit: usize, hint: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
