use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("unknown ingest format '{name}' (registered: {known})")]
    UnknownFormat { name: String, known: String },

    #[error("cannot tell the input format of {0}")]
    UndetectedFormat(PathBuf),

    #[error("missing frames {missing:?} in {dir}")]
    MissingFrames { dir: PathBuf, missing: Vec<u64> },

    #[error("{file}:{line}: {reason}")]
    Malformed {
        file: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: image is {got}, expected {expected}")]
    GeometryMismatch {
        path: PathBuf,
        got: String,
        expected: String,
    },

    #[error("no frames in {0}")]
    Empty(PathBuf),

    #[error(transparent)]
    Detector(#[from] tactile_slip::Error),

    #[error(transparent)]
    Simulator(#[from] gelsim::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
