use thiserror::Error;

/// Errors produced by chart geometry, operator evaluation, and the flow.
#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not symmetric positive definite at {point:?}")]
    DegenerateMetric { point: Vec<f64> },

    #[error("point {point:?} lies outside the chart domain of `{manifold}`")]
    OutsideDomain { manifold: String, point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation needs an even dimension, got {0}")]
    OddDimension(usize),

    #[error("valence {valence} is out of range for this operation on an {dim}-manifold")]
    ValenceError { valence: usize, dim: usize },

    #[error("valence mismatch: {left} vs {right}")]
    ValenceMismatch { left: usize, right: usize },

    #[error("unknown manifold `{0}`")]
    UnknownManifold(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation `{op}` is not supported on `{manifold}`")]
    Unsupported { op: String, manifold: String },

    #[error("matrix has real eigenvalues; no retraction onto J^2 = -I")]
    NonRetractable,

    #[error("conjugation field stayed singular after {0} retries")]
    SingularConjugation(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
