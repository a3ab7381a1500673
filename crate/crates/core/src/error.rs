use thiserror::Error;

/// Recoverable failures. Contract violations (mismatched dimensions,
/// out-of-range probabilities, inverted intervals) panic instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not enough data: {0}")]
    NotEnoughData(String),

    #[error("the Pareto set is empty")]
    EmptyParetoSet,

    #[error("relative volume threshold {0} was never reached")]
    ThresholdUnreached(f64),

    #[error("break-even time not applicable: {0}")]
    NotApplicable(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("black-box evaluation failed: {0}")]
    Evaluation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
