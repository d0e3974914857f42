use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("video contains no frames")]
    EmptyVideo,

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("need at least {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("degenerate item: {0}")]
    DegenerateItem(String),

    #[error("backend `{backend}` failed: {message}")]
    Backend { backend: String, message: String },

    #[error("backend `{backend}` violated its contract: {message}")]
    BackendContract { backend: String, message: String },

    #[error("manifest error in field `{field}`: {message}")]
    Manifest { field: String, message: String },

    #[error("non-finite value in `{0}`")]
    NonFinite(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("reliability is undefined for this rater matrix (denominator {denominator})")]
    UndefinedReliability { denominator: f64 },

    #[error("degenerate ANOVA: all observations are identical")]
    DegenerateAnova,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("clip policy error: {0}")]
    Policy(String),

    #[error("clip extraction error: {0}")]
    Extraction(String),

    #[error(
        "latent schedule infeasible: head {head} + tail {tail} > total {total} \
         (rounding added {rounding_loss} latent positions)"
    )]
    InfeasibleSchedule {
        head: usize,
        tail: usize,
        total: usize,
        rounding_loss: usize,
    },

    #[error("undefined direction: zero-length vector")]
    UndefinedDirection,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn manifest(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Manifest {
            field: field.into(),
            message: message.into(),
        }
    }
}
