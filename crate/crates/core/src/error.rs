use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension must be positive")]
    EmptyDimension,

    #[error("profile is not symmetric at ({i}, {j}): {upper} != {lower}")]
    AsymmetricProfile {
        i: usize,
        j: usize,
        upper: f64,
        lower: f64,
    },

    #[error("profile entry ({i}, {j}) is negative: {value}")]
    NegativeEntry { i: usize, j: usize, value: f64 },

    #[error("non-finite value at ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("evaluation point must lie in the upper half-plane, got Im z = {0}")]
    NotUpperHalfPlane(f64),

    #[error("grid abscissae must be finite and strictly increasing (index {index})")]
    GridNotIncreasing { index: usize },

    #[error("transform value at index {index} has positive imaginary part {imag:e}")]
    PositiveImaginary { index: usize, imag: f64 },

    #[error("all {draws} Monte-Carlo draws failed to converge")]
    AllDrawsDiscarded { draws: usize },

    #[error("estimated work {required:e} exceeds the guard {limit:e}")]
    WorkGuard { required: f64, limit: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("empirical sample is empty")]
    EmptySample,

    #[error("Hermitian eigensolver did not converge")]
    EigenFailure,

    #[error("invalid pairing: {0}")]
    InvalidPairing(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
