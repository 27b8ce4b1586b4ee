use thiserror::Error;

use crate::spectral::WaveVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid torus: {0}")]
    InvalidTorus(String),

    #[error("fields live on different tori")]
    TorusMismatch,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("nonzero mean mode in {0}")]
    NonzeroMean(&'static str),

    #[error("field is not Hermitian at mode {0}")]
    NotHermitian(WaveVector),

    #[error("field is not solenoidal (relative divergence {0:e})")]
    NotSolenoidal(f64),

    #[error("mode count {count} exceeds the configured cap {cap} while computing {what}")]
    ModeCap {
        what: &'static str,
        count: usize,
        cap: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
