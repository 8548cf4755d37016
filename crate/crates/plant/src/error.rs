use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: rating {rating} outside [1, 5]")]
    RatingOutOfRange { line: usize, rating: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("no scored candidates")]
    EmptyCandidates,
    #[error("no example block for category `{0}`")]
    UnknownCategory(String),
    #[error("request timed out")]
    Timeout,
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("gave up after {0} attempts")]
    RetriesExhausted(usize),
    #[error("backend returned status {0}")]
    BackendError(u16),
    #[error("record `{0}` is not eligible for this stage")]
    SkippedRecord(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
