use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("route {route}: {reason}")]
    MalformedRoute { route: usize, reason: String },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("series too short: need at least {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("empty octave range [{j1}, {j2}]")]
    EmptyFitRange { j1: usize, j2: usize },

    #[error("relative m.s.e. undefined: actual series is identically zero")]
    ZeroDenominator,

    #[error("link {link} is predicted exactly (zero predictive std, max |residual| = {max_residual:e})")]
    ExactPrediction { link: usize, max_residual: f64 },

    #[error("unknown link id {0}")]
    UnknownLink(usize),

    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
