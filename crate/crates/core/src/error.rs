use thiserror::Error;

use crate::lattice::MultiIndex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("index {0} lies outside the family's domain")]
    OutOfDomain(MultiIndex),

    #[error("empty averaging window")]
    EmptyWindow,

    #[error("floor of {what} undecidable after {bits} bits of working precision")]
    FloorUndecidable { what: String, bits: u32 },

    #[error("value expected to be real has imaginary part {imag:e} (real part {real:e})")]
    ImaginaryResidue { real: f64, imag: f64 },

    #[error("coefficient family is not Hermitian: a(-h) != conj a(h) at h = {0}")]
    NotHermitian(MultiIndex),

    #[error("coefficient family is not positive-definite")]
    NotPositiveDefinite,

    #[error("frequencies outside the allowed spectrum: {0:?}")]
    SpectrumViolation(Vec<MultiIndex>),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("no term divisible by {modulus} among the first {scanned} terms")]
    EmptyFilter { modulus: String, scanned: usize },

    #[error("d_m ordering violated at m = {index}: {reason}")]
    BadOrdering { index: usize, reason: String },

    #[error("measure is not a probability measure (total mass {0})")]
    NotProbability(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
