use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum NgrcError {
    #[error("invalid feature spec: {0}")]
    InvalidSpec(String),

    #[error("sample index {index} precedes the delay warm-up ({warmup} prior samples required)")]
    IndexBeforeWarmup { index: usize, warmup: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("model mode mismatch: expected {expected}, model is {actual}")]
    ModeMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("root bracketing failed on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("return map needs at least 2 maxima, found {0}")]
    EmptyReturnMap(usize),

    #[error("malformed document: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = NgrcError> = std::result::Result<T, E>;
