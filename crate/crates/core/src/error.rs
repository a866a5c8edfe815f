use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("transform length must be positive")]
    ZeroLength,

    #[error("length {0} must be even")]
    OddLength(usize),

    #[error("length {0} must be odd")]
    EvenLength(usize),

    #[error("unsupported length {n}: supported lengths are q*2^m for q in {supported:?}")]
    UnsupportedLength { n: usize, supported: Vec<usize> },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("input contains a non-finite value at position {0}")]
    NonFiniteInput(usize),

    #[error("constant must be finite and nonzero, got {0}")]
    BadConstant(f64),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("plan {name} does not match its oracle: max error {error:e} exceeds {tolerance:e}")]
    OracleMismatch {
        name: String,
        error: f64,
        tolerance: f64,
    },

    #[error("no registry entry for q = {q}; registry holds {available:?}")]
    UnknownBase { q: usize, available: Vec<usize> },

    #[error("bound requires m >= 1")]
    ZeroDyadicExponent,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("plan file: {0}")]
    Json(#[from] serde_json::Error),
}
