use thiserror::Error;

use crate::solver::SolverTrace;

pub type Result<T, E = QuicError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QuicError {
    #[error("matrix is not positive definite (non-positive pivot at index {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line search failed after {backtracks} backtracks (delta = {delta:e})")]
    LineSearchFailed {
        backtracks: usize,
        delta: f64,
        /// Iterations completed before the failure, when raised from a solver.
        trace: Option<Box<SolverTrace>>,
    },

    #[error("at least two samples are needed, got {0}")]
    InsufficientSamples(usize),

    #[error("target of {target} nonzeros is infeasible for dimension {p}")]
    InfeasibleTarget { target: usize, p: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
