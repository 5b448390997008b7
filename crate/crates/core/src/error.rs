use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every module.
///
/// Some variants are not failures in the usual sense: `DeltaPairFound` and
/// `OutsideShortPathDomain` carry exactly the coincidence certificates that the
/// theorems promise, and `BudgetExhausted` reports a search that ran out of
/// evaluations while the object it looked for is known to exist.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported dimension {dim} (supported: {supported})")]
    UnsupportedDimension { dim: usize, supported: &'static str },
    #[error("complex is not a closed manifold: {0}")]
    NotClosedManifold(String),
    #[error("invalid complex at {path}: {reason}")]
    InvalidComplex { path: String, reason: String },
    #[error("point is not on the space (off by {offset:e})")]
    InvalidPoint { offset: f64 },
    #[error("pair at distance {distance} is outside the short path domain")]
    OutsideShortPathDomain { p: Vec<f64>, q: Vec<f64>, distance: f64 },
    #[error("vector is not a unit tangent (off by {offset:e})")]
    InvalidTangent { offset: f64 },
    #[error("empty point set")]
    EmptySet,
    #[error("image of vertex {vertex} is not on the target: {reason}")]
    InvalidImage { vertex: usize, reason: String },
    #[error("target point is within tolerance of a critical image")]
    NonGenericTarget,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("map has odd mod-2 degree")]
    OddDegree,
    #[error("pair at distance {distance} matches delta")]
    DeltaPairFound { x: Vec<f64>, y: Vec<f64>, distance: f64 },
    #[error("non-simple event at path parameter {param}")]
    NonSimpleEvent { param: f64 },
    #[error("search budget exhausted after {evaluations} evaluations (best residual {best_residual:e})")]
    BudgetExhausted { best_residual: f64, evaluations: usize },
    #[error("delta {delta} is outside (0, {rho}]")]
    DeltaOutOfRange { delta: f64, rho: f64 },
    #[error("map has codimension {0}, expected 1")]
    WrongCodimension(i64),
    #[error("curve is not closed")]
    NotClosed,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}
