use thiserror::Error;

/// Failures raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular to working precision (smallest singular value {sigma_min:e})")]
    SingularMatrix { sigma_min: f64 },

    #[error("matrix is not Hermitian (‖a - a*‖_F = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("missing field `{0}`")]
    MissingField(String),

    #[error("index {index} is outside the domain of coefficient {kind}")]
    IndexOutOfDomain { kind: char, index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("profile is not admissible: {0}")]
    InvalidProfile(String),

    #[error("interpolation residual {residual:e} exceeds tolerance {tolerance:e}")]
    IllConditionedInterpolation { residual: f64, tolerance: f64 },

    #[error("Newton iteration did not converge from t = {start}")]
    NewtonDivergence { start: f64 },

    #[error("root at t = {t} is degenerate: no derivative up to order {order} is above threshold")]
    DegenerateRoot { t: f64, order: usize },

    #[error("no null vector at t = {t}: smallest singular value {sigma_min:e}")]
    NullVectorNotFound { t: f64, sigma_min: f64 },

    #[error("finite section of length {n} is too small; need at least {required}")]
    TruncationTooSmall { n: usize, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
