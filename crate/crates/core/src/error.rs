//! Error type shared by all modules.

/// Errors produced by game construction, oracles, solvers, and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input data (dimension mismatches, empty
    /// samples, profiles that do not belong to their classes, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Bad run configuration (parameters out of range, unknown identifiers).
    #[error("configuration error: {0}")]
    Config(String),

    /// The operation is not defined for the given class kind or dimension.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A configured budget or limit was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A better-response oracle failed; carries the step context.
    #[error("oracle failure (player {player}, step {step}): {message}")]
    Oracle {
        player: usize,
        step: u64,
        message: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl From<crate::arith::ScalarParseError> for Error {
    fn from(e: crate::arith::ScalarParseError) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
