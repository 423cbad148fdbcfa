//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported edge weight type: {0}")]
    UnsupportedEdgeWeightType(String),

    #[error("missing required field: {0}")]
    MissingField(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported schema version: {0}")]
    VersionMismatch(String),

    #[error("tour is not proven optimal; pass allow_unproven to label anyway")]
    UnprovenTour,

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
