use thiserror::Error;

/// Errors raised by the library layer.
///
/// Exact checks (equivariance, invariance, factorization) report
/// failure through their return values, not through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension k = {k} is unsupported (allowed range 1..={max})")]
    DimensionUnsupported { k: usize, max: usize },

    #[error("map vanishes identically at {point}: not holomorphic there")]
    HolomorphyViolation { point: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate polynomial map: every component is zero")]
    DegenerateMap,

    #[error("components must be homogeneous of one common degree")]
    NotHomogeneous,

    #[error("divisor is not a linear form or a nonzero constant")]
    UnsupportedDivisor,

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("exact determinant is limited to k <= {max} (got k = {k}); use the numeric fallback")]
    DeterminantUnsupported { k: usize, max: usize },

    #[error("hyperplanes have no common point in projective space")]
    NotAFlat,

    #[error("invalid hyperplane: {0}")]
    InvalidHyperplane(String),

    #[error("group closure exceeded {limit} elements")]
    GroupClosure { limit: usize },

    #[error("image of the flat is not contained in the flat")]
    InvarianceViolation,

    #[error("non-finite value during iteration")]
    NumericOverflow,

    #[error("root solver failed to converge (residual {residual:e})")]
    RootSolver { residual: f64 },

    #[error("the zero vector is not a projective point")]
    ZeroPoint,

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
