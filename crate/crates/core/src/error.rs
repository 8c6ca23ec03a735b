use thiserror::Error;

use crate::network::ActorId;
use crate::value::Pattern;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("malformed pattern text: {0}")]
    MalformedText(String),
    #[error("binder `{0}` appears more than once")]
    DuplicateBinder(String),
    #[error("assertion {assertion} leaves a wildcard in a capture position")]
    CaptureUnbounded { assertion: Pattern },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("network not quiescent after {0} dispatches")]
    NonQuiescent(usize),
    #[error("visibility bookkeeping diverged for {actor}: {detail}")]
    OracleDivergence { actor: ActorId, detail: String },
}
