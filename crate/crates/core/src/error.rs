use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("empty candidate pool")]
    EmptyPool,
    #[error("unsupported dimension {dim} (max {max})")]
    UnsupportedDimension { dim: usize, max: usize },
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
