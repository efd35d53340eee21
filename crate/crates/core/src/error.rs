use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("order relation has a cycle through elements {0} and {1}")]
    Cycle(usize, usize),

    #[error("index {index} out of range (expected {bound})")]
    Index { index: usize, bound: String },

    #[error("set {0} is not ancestral")]
    NotAncestral(String),

    #[error("{what} of size {size} exceeds the limit {limit}")]
    SizeLimit {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("product space has {0} states, above the dense cap of 65536")]
    SizeCap(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("row {row} is not stochastic: {reason}")]
    NotStochastic { row: usize, reason: String },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("chain is not irreducible")]
    NotIrreducible,

    #[error("chain is not reversible: {0}")]
    NotReversible(String),

    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("degenerate coefficient recursion at node {0}")]
    Degenerate(usize),
}
