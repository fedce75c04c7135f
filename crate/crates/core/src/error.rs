use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: wrong dimensions, negative or non-finite values.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Well-formed input that violates a mathematical precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure failed to produce an answer.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
