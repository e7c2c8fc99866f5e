use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (relative defect {defect:.3e})")]
    NotSymmetric { defect: f64 },

    #[error("symbol is not elliptic")]
    NotElliptic,

    #[error("numerical range is the whole plane")]
    FullPlane,

    #[error("numerical range is a half-line; the symbol is normal")]
    HalfLine,

    #[error("symbol is normal: boundary orders are undefined")]
    NormalSymbol,

    #[error("matrix is not symplectic (defect {defect:.3e})")]
    NotSymplectic { defect: f64 },

    #[error("invalid operator term: {0}")]
    InvalidTerm(String),

    #[error("real part is not positive definite")]
    NotPositiveDefinite,

    #[error("truncated matrix needs {rows} rows, budget is {budget}")]
    BudgetExceeded { rows: usize, budget: usize },

    #[error("radius {radius} is smaller than 2|z| = {needed}")]
    RadiusTooSmall { radius: f64, needed: f64 },

    #[error("point {re}+{im}i is not interior to the numerical range")]
    NotInterior { re: f64, im: f64 },

    #[error("no sign change of the bracket found within horizon {horizon}")]
    NoWitnessWithinHorizon { horizon: f64 },

    /// `partial` holds the `(h, h^-1 ||R(z/h)||)` samples computed before the failure.
    #[error("semiclassical fit aborted: sample at h = {h} did not converge after {} samples", partial.len())]
    FitAborted { h: f64, partial: Vec<[f64; 2]> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}
