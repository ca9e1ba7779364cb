use thiserror::Error;

/// Errors raised by body construction and the geometric pipelines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("point is not interior to the body (margin {margin:e})")]
    PointNotInterior { margin: f64 },

    #[error("polar is numerically unbounded (interior margin {margin:e} below threshold)")]
    UnboundedResult { margin: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("affine map is singular (|det| = {det:e})")]
    SingularMap { det: f64 },

    #[error("exact volume unsupported in dimension {dim}")]
    TooHighDimensional { dim: usize },

    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("density vanishes at the origin")]
    ZeroAtOrigin,

    #[error("exponent p must be positive, got {0}")]
    NonPositiveP(f64),

    #[error("density range ratio {ratio:e} exceeds m^n = {allowed:e}")]
    RangeRatioExceeded { ratio: f64, allowed: f64 },

    #[error("operation requires a polytope")]
    NonPolytope,

    #[error("search budget exhausted: best det Cov = {best_det:e} > target {target:e}")]
    BudgetExhaustedWithoutCertificate {
        best_xi: Vec<f64>,
        best_det: f64,
        target: f64,
    },

    #[error("covering gauge must be symmetric")]
    NonSymmetricGauge,

    #[error("inclusion violated: {0}")]
    InclusionViolated(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        best: Vec<f64>,
        residual: f64,
        iterations: usize,
    },

    #[error("degenerate random sample after {attempts} attempts")]
    DegenerateSample { attempts: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
