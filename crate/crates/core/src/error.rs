use thiserror::Error;

/// Errors raised by the geometry, construction and I/O layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular at the active tolerance")]
    SingularMatrix,

    #[error("points do not span a hyperplane (rank {rank}, need {needed})")]
    DegenerateSpan { rank: usize, needed: usize },

    #[error("hyperplanes do not meet in a single point (rank {rank}, need {needed})")]
    DegenerateMeet { rank: usize, needed: usize },

    #[error("need at least {needed} correspondences, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("index {index} has the wrong parity for this slot family")]
    ParityError { index: i64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("classification failed: {0}")]
    ClassificationFailure(String),

    #[error("degenerate rotation frequencies: {0}")]
    DegenerateFrequencies(String),

    #[error("infeasible constraints: {0}")]
    InfeasibleConstraints(String),

    #[error("construction failed after {retries} attempts (last residual {residual:e}): {reason}")]
    ConstructionFailed {
        retries: usize,
        residual: f64,
        reason: String,
    },

    #[error("numerical rank is unstable: {0}")]
    RankUnstable(String),

    #[error("gcd(n, k) = gcd({n}, {k}) = {gcd}, expected 1")]
    GcdViolation { n: usize, k: usize, gcd: usize },

    #[error("kernel defect: {0}")]
    KernelDefect(String),

    #[error("vertex in slot {slot} cannot be placed in the affine chart: {reason}")]
    ChartFailure { slot: usize, reason: String },

    #[error("not supported in exact arithmetic: {0}")]
    ExactUnsupported(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
