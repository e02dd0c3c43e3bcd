//! Error type shared across the crate, with a stable mapping to CLI exit codes.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed graph or matrix input, with the 1-based line it came from.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The request is outside the implemented size limits.
    #[error("capability limit: {0}")]
    Capability(String),

    /// A documented precondition was violated by the caller.
    #[error("precondition violated: {0}")]
    Contract(String),

    /// A numerical computation hit a nongeneric (singular) point.
    #[error("nongeneric point: {0}")]
    Nongeneric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable process exit code for this error.
    ///
    /// 0 success, 1 usage/parse error, 2 capability error, 3 numerical
    /// nongenericity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Io(_) => 1,
            Error::Capability(_) | Error::Contract(_) => 2,
            Error::Nongeneric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
