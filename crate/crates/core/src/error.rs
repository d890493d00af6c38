use thiserror::Error;

/// Errors raised by the laboratory's constructions and estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("map is rank deficient: smallest singular value {0:e}")]
    SingularMap(f64),

    #[error("degenerate scale window: {0}")]
    DegenerateWindow(String),

    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("depth limit: {0}")]
    Depth(String),

    #[error("size limit: {0}")]
    Size(String),

    #[error("no tabulated value for point {0}")]
    Lookup(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
