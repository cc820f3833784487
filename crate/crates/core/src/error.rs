use thiserror::Error;

/// Errors produced by the projection library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible points: dimension {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("unsupported sphere dimension q={0}")]
    UnsupportedDimension(usize),

    #[error("integer overflow evaluating {0}")]
    Overflow(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("refinement cap reached without convergence (previous {previous:e}, last {last:e})")]
    RefinementCap { previous: f64, last: f64 },

    #[error("non-finite function value at node {index}")]
    NonFinite { index: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{nodes} nodes cannot determine a {dim}-dimensional polynomial space")]
    TooFewNodes { nodes: usize, dim: usize },

    #[error("degenerate node set: {0}")]
    Degenerate(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
