use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid orgraph: {0}")]
    InvalidGraph(String),

    #[error("order {order} outside supported range {min}..={max}")]
    OrderOutOfRange { order: usize, min: usize, max: usize },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("invalid flag: {0}")]
    InvalidFlag(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid blowup: {0}")]
    InvalidBlowup(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
