use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {0} has zero norm")]
    ZeroRow(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("embeddings must be row-normalized before computing similarities")]
    NotNormalized,
    #[error("index {index} out of range for a batch of {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid batch: {0}")]
    InvalidBatch(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("training diverged at step {step}: loss = {loss}")]
    Divergence { step: usize, loss: f64 },
    #[error("embedding file error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
