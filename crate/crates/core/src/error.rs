use thiserror::Error;

/// Errors produced by the NBSE pipeline.
#[derive(Debug, Error)]
pub enum NbseError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// λ_min(H(β)) never changed sign over the scanned range.
    #[error("no transition: λ_min(H(β)) stays positive for β up to {beta_max}")]
    NoTransition { beta_max: f64 },

    #[error("solver did not converge after {iterations} iterations (best residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("β·max|W| = {product} exceeds the sinh overflow guard {limit}")]
    Overflow { product: f64, limit: f64 },

    #[error("girth target {target} not met after {retries} retries (best girth achieved: {best})")]
    GirthNotMet {
        target: usize,
        retries: usize,
        best: String,
    },

    #[error("size {size} exceeds dense cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NbseError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(NbseError::InvalidInput(msg.into()))
}
