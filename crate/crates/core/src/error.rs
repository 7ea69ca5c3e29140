use thiserror::Error;

use crate::market::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown spatial node `{0}`")]
    UnknownNode(String),

    #[error("unknown product `{0}`")]
    UnknownProduct(String),

    #[error("time index {index} out of range for a grid of {len} periods")]
    TimeOutOfRange { index: usize, len: usize },

    #[error("arc {0} runs backward in time")]
    BackwardTimeArc(String),

    #[error("arc {0} is a self-loop")]
    SelfLoopArc(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("instance failed validation with {} violation(s); first: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidInstance(Vec<Violation>),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("solver did not reach optimality (status {0})")]
    NotOptimal(String),

    #[error("no clearing price for non-dry stakeholder `{0}`")]
    UndefinedNodalPrice(String),

    #[error("invalid case parameters: {0}")]
    InvalidParams(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
