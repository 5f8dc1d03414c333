use thiserror::Error;

/// Errors produced by the LP time-series routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),

    #[error("lag {lag} leaves only {overlap} overlapping observations (need at least {required})")]
    InsufficientOverlap {
        lag: usize,
        overlap: usize,
        required: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("copula density has no positive mass: {0}")]
    DegenerateCopula(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("model is not stable: {0}")]
    UnstableModel(String),

    #[error("regressor matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LpError>;

pub(crate) fn check_probability(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(LpError::InvalidProbability(u))
    }
}
