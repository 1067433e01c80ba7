use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape: {0}")]
    Shape(String),
    #[error("parameter: {0}")]
    Parameter(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("format: {0}")]
    Format(String),
    #[error("index {index} out of range for length {len}")]
    Index { index: u128, len: u128 },
    #[error("unsupported backend: {0}")]
    UnsupportedBackend(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("oracle refused: {0}")]
    OracleRefusal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn capacity(msg: impl Into<String>) -> Error {
    Error::Capacity(msg.into())
}
