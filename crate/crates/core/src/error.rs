use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step called on a terminal state")]
    TerminalStep,
    #[error("illegal action `{action}` for this configuration")]
    IllegalAction { action: String },
    #[error("unsupported observation mode: {0}")]
    UnsupportedMode(String),
    #[error("state space of {size} entries exceeds the cap of {cap}")]
    Capacity { size: usize, cap: usize },
    #[error("best-response capacity error at iteration {iteration}: {source}")]
    IterationCapacity {
        iteration: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("CPU level {0} outside 1..=8")]
    CpuLevel(u8),
    #[error("payoff entry ({row}, {col}) is unknown; estimate it first")]
    UnknownPayoff { row: usize, col: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("role {0} is not part of the roster")]
    Role(String),
}
