use thiserror::Error;

/// Errors produced by the code-design library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{what} index {index} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("entry {index} has modulus {modulus}, expected 1")]
    NotUnimodular { index: usize, modulus: f64 },

    #[error("code length must be at least 1")]
    EmptyCode,

    #[error("duplicate interference bin (r={r}, h={h})")]
    DuplicateBin { r: usize, h: usize },

    #[error("invalid weight {weight} at bin (r={r}, h={h})")]
    InvalidWeight { r: usize, h: usize, weight: f64 },

    #[error("interference map has no positive weight")]
    EmptyObjective,

    #[error("infinite SIR: interference energy of the code on this map is zero")]
    InfiniteSir,

    #[error("degenerate retraction at entry {index}: |s + xi| = {modulus}")]
    DegenerateRetraction { index: usize, modulus: f64 },

    #[error("vector is not tangent at entry {index} (Re{{conj(s) xi}} = {residual})")]
    NotTangent { index: usize, residual: f64 },

    #[error("tangent vectors live at different base points")]
    BaseMismatch,

    #[error("trust-region radius must be positive, got {0}")]
    InvalidRadius(f64),

    #[error("degenerate objective: no Gram eigenvalue exceeds {threshold}")]
    DegenerateObjective { threshold: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
