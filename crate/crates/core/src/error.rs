use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where a failed evaluation came from, kept for batch diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialBatch {
    pub completed: usize,
    pub total: usize,
}

impl fmt::Display for PartialBatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} requests completed", self.completed, self.total)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("budget too small: need at least {required}, have {available}")]
    BudgetTooSmall { required: u64, available: u64 },

    #[error("construction infeasible: {0}")]
    ConstructionInfeasible(String),

    #[error("resource limit exceeded: {needed} items requested, limit is {limit}")]
    ResourceLimit { needed: u128, limit: u128 },

    #[error("zooming fit failed: {0}")]
    FitFailed(String),

    #[error("invalid loss {value} for {source_name}")]
    InvalidLoss { source_name: String, value: String },

    #[error("integer budget overflow while computing {0}")]
    Overflow(&'static str),

    #[error("failed to spawn evaluator `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },

    #[error("evaluator protocol violation: {0}")]
    Protocol(String),

    #[error("evaluator timed out after {0:.1}s")]
    Timeout(f64),

    #[error("evaluator process exited: {0}")]
    WorkerExited(String),

    #[error("batch {batch} failed ({partial}): {source}")]
    BatchFailed {
        batch: usize,
        partial: PartialBatch,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
