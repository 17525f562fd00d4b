//! Crate-wide error type.

/// Errors produced by construction, propagation, optimization and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An eigensolver or root finder failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A requested value lies outside the reachable range.
    #[error("out of range: {0}")]
    Range(String),
    /// A configuration file or schema problem.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
