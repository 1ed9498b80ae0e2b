//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by sequence design, metrics and the radar simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is out of range or inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A computation produced non-finite values or an unusable matrix.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// An input file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
