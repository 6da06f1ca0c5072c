use thiserror::Error;

/// Errors raised by the stability toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate profile denominator ({0})")]
    DegenerateDenominator(&'static str),

    #[error("wavenumber k = 0 is not admissible here")]
    ZeroWavenumber,

    #[error("grid needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(f64),

    #[error("eigensolver failed at k = {k}: {reason}")]
    SolverFailure { k: i64, reason: String },

    #[error("no resolution-confirmed eigenvalues at k = {k}")]
    NoResolvedModes { k: i64 },

    #[error("bound parameter h = {0} must be positive")]
    NonpositiveH(f64),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("effective Reynolds number is zero, bound is vacuous")]
    ZeroReynolds,

    #[error("Green function denominator vanishes or zeta outside the sector: {0}")]
    SingularDenominator(String),

    #[error("singular linear system: {0}")]
    SingularMatrix(String),

    #[error("implicit step matrix is singular")]
    SingularStep,

    #[error("energy history contains a non-positive value at t = {0}")]
    NonPositiveEnergy(f64),

    #[error("need at least {min} post-transient samples, got {got}")]
    InsufficientSamples { min: usize, got: usize },

    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
