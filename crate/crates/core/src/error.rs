use thiserror::Error;

/// Failures of the design and numerics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hurwitz")]
    NotHurwitz,
    #[error("matrix is not symmetric positive-definite: {0}")]
    NotPositiveDefinite(&'static str),
    #[error("linear system is singular (pivot {pivot:e})")]
    SingularSystem { pivot: f64 },
    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(&'static str),
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("closed-loop DC gain {0:e} is too small to invert")]
    SingularDcGain(f64),
    #[error("integral-augmented design loop is not Hurwitz for ki = {ki}")]
    UnstableAugmentedLoop { ki: f64 },
    #[error("transformation is singular: a12 = {a12:e}")]
    SingularTransform { a12: f64 },
    #[error("transformed reference model is not in companion form (residual {residual:e})")]
    CompanionFormViolation { residual: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("adaptation rate {0} is zero")]
    ZeroRate(&'static str),
    #[error("trace has no samples")]
    EmptyTrace,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
