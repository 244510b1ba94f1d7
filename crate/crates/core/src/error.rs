use thiserror::Error;

/// Errors produced by model construction, age evaluation and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system configuration: {0}")]
    InvalidConfig(String),
    #[error("probability at index {index} is {value}, expected a positive value")]
    NonPositiveEntry { index: usize, value: f64 },
    #[error("probability at index {index} is {value}, expected a value in [0, 1]")]
    InvalidProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("weight at index {index} is {value}, expected a positive value")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("probability {0} must be positive")]
    NonPositiveProbability(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("budget split sums to {sum}, expected alpha = {alpha}")]
    InvalidSplit { sum: f64, alpha: f64 },
    #[error("channel {target} out of range for {channels} channels")]
    TargetOutOfRange { target: usize, channels: usize },
    #[error("index {index} out of range for {len} users")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("blocking plan is infeasible: {0}")]
    InfeasiblePlan(String),
    #[error("invalid slot range: {start} > {end}")]
    InvalidRange { start: usize, end: usize },
    #[error("operation requires sub-carrier diversity (at least two sub-carriers)")]
    NoDiversity,
    #[error("operation is defined only for the single-channel-per-user model")]
    RequiresNoDiversity,
    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),
    #[error("at least {min} runs required, got {got}")]
    InsufficientRuns { min: usize, got: usize },
    #[error("descent did not converge: gradient-mapping norm {residual:e} after {iterations} iterations")]
    ConvergenceFailure { residual: f64, iterations: usize },
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
