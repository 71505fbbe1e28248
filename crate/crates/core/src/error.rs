use thiserror::Error;

use crate::cube::Domain;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cube domain mismatch: expected {expected:?}, found {found:?}")]
    DomainMismatch { expected: Domain, found: Domain },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad magic bytes in cube file")]
    BadMagic,

    #[error("unsupported cube file version {0}")]
    VersionMismatch(u16),

    #[error("cube file truncated: expected {expected} bytes of samples, got {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("cube dimensions overflow addressable size")]
    DimensionOverflow,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
