//! Sparse inverse covariance estimation by a proximal Newton method.
//!
//! Solves
//!
//! ```text
//! minimize_{X > 0}  -log det X + tr(S X) + sum_ij lambda_ij |X_ij|
//! ```
//!
//! with Newton directions computed by coordinate descent over a free set of
//! variables, an Armijo line search that keeps iterates positive definite,
//! and block decomposition when the thresholded covariance is disconnected.
//!
//! ```
//! use quic_core::{chain_precision, sample_gaussian, sample_covariance};
//! use quic_core::{solve_quic, Problem, SolverConfig};
//!
//! let truth = chain_precision(20).unwrap();
//! let data = sample_gaussian(&truth, 200, 1).unwrap();
//! let prob = Problem::off_diagonal(sample_covariance(&data).unwrap(), 0.2).unwrap();
//! let sol = solve_quic(&prob, None, &SolverConfig::default()).unwrap();
//! assert!(sol.converged);
//! ```

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod activeset;
pub mod data;
pub mod direction;
mod error;
pub mod io;
pub mod linesearch;
pub mod matrix;
pub mod metrics;
pub mod objective;
pub mod solver;

pub use activeset::{partition, threshold_pattern, BlockStructure, Partition};
pub use data::{
    chain_precision, random_precision, sample_covariance, sample_gaussian, Dataset, GroundTruth,
    PRNG_NAME,
};
pub use direction::{
    coord_update, diagonal_closed_form, newton_direction, soft_threshold, DirectionState,
};
pub use error::{QuicError, Result};
pub use linesearch::{armijo_search, compute_delta, LineSearchConfig, StepResult};
pub use matrix::{cholesky, inverse_from_factor, logdet, trace_product, CholFactor, SymMatrix};
pub use metrics::{recovery, relative_error, RecoveryReport};
pub use objective::{
    f_value, g_value, gradient_g, h_value, min_norm_subgradient, IterateState, Problem,
};
pub use solver::{
    duality_gap, solve_quic, solve_quic_observed, solve_reference, solve_reference_with,
    IterationView, ReferenceConfig, Solution, SolverConfig, SolverTrace, StopReason, TraceRow,
};
