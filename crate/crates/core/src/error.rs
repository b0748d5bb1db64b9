use thiserror::Error;

/// Errors raised by the estimation and bound routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularMatrix { condition: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("matrix is not symmetric/Hermitian within tolerance")]
    NotSymmetric,
    #[error("matrix is not positive semidefinite within tolerance")]
    NotPositiveSemidefinite,
    #[error("candidate set is empty")]
    EmptyCandidateSet,
    #[error("criterion score for model {model_index} is not finite")]
    NonFiniteScore { model_index: usize },
    #[error("negative covariance trace {value:e} for model {model_index}")]
    NegativeCovarianceTrace { model_index: usize, value: f64 },
    #[error("eigendecomposition failed to converge")]
    EigenFailure,
    #[error("every candidate model failed")]
    AllCandidatesFailed,
    #[error("model order {order} out of range (max {max})")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("target count D = {0} must be even for a zero-sum constant-modulus design")]
    OddTargetCount(usize),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("eigenvalue {index} is not positive")]
    NonPositiveEigenvalue { index: usize },
    #[error("AR polynomial is not stable")]
    UnstableModel,
    #[error("lag {maxlag} too large for {len} samples")]
    LagTooLarge { maxlag: usize, len: usize },
    #[error("zero-lag autocovariance is not positive")]
    NonPositiveR0,
    #[error("Levinson-Durbin step {order} produced |K| >= 1")]
    DegenerateStep { order: usize },
    #[error("Toeplitz autocovariance matrix is singular")]
    SingularToeplitz,
    #[error("need at least {needed} samples for order {order}, got {got}")]
    TooFewSamples { needed: usize, order: usize, got: usize },
    #[error("innovation variance must be positive")]
    NonPositiveVariance,
    #[error("partial correlation {index} has magnitude >= 1")]
    DegeneratePartial { index: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
