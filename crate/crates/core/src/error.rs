use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid sensor geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inner contact region holds {found} markers, need at least {required}")]
    InsufficientInnerRegion { found: usize, required: usize },

    #[error("rotation unobservable: point spread {spread:.3e} mm")]
    DegenerateConfiguration { spread: f64 },

    #[error("frame geometry {frame} does not match reference geometry {reference}")]
    GeometryMismatch { reference: String, frame: String },

    #[error("detector has no reference frame")]
    NoReference,

    #[error("unknown {kind} '{name}' (registered: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
