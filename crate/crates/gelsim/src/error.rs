use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid object `{name}`: {reason}")]
    InvalidObject { name: String, reason: String },
    #[error("load script frame {frame}: {reason}")]
    InvalidScript { frame: usize, reason: String },
    #[error(transparent)]
    Core(#[from] tactile_slip::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
