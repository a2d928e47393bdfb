use crate::metric::PointId;

/// Errors raised by the clustering engine and its checkers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point {id} is out of range (space holds {len} points)")]
    OutOfRange { id: PointId, len: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error("invalid swap: {0}")]
    InvalidSwap(String),

    #[error("point {0} was already inserted")]
    DuplicatePoint(PointId),

    #[error("penalty may only grow (current {current}, requested {requested})")]
    PenaltyDecrease { current: f64, requested: f64 },

    #[error("infeasible: k = {k} exceeds the {available} available facilities")]
    Infeasible { k: usize, available: usize },

    #[error("bicriteria mode needs z >= 1; use the penalty search with an infinite penalty")]
    BicriteriaInapplicable,

    #[error("penalty bound is undefined for z = 0")]
    PenaltyBoundInapplicable,

    #[error("enumeration of {subsets} subsets exceeds the guard of {limit}")]
    TooLarge { subsets: u128, limit: u128 },

    #[error("operation unsupported in this mode: {0}")]
    UnsupportedMode(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
