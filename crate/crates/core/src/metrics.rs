//! Structure recovery and convergence measures.

use crate::data::GroundTruth;
use crate::error::{QuicError, Result};
use crate::matrix::SymMatrix;

/// Entries with magnitude above this count as nonzero by default.
pub const DEFAULT_NONZERO_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    pub tpr: f64,
    pub fpr: f64,
    pub nnz_estimate: usize,
    pub nnz_truth: usize,
    pub threshold: f64,
}

/// Which index pairs enter the counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairScope {
    All,
    OffDiagonal,
}

/// True/false positive rates of the pattern `|estimate_ij| > threshold`
/// against the ground-truth pattern, over all ordered pairs.
pub fn recovery(
    estimate: &SymMatrix,
    truth: &GroundTruth,
    threshold: f64,
) -> Result<RecoveryReport> {
    recovery_scoped(estimate, truth, threshold, PairScope::All)
}

pub fn recovery_scoped(
    estimate: &SymMatrix,
    truth: &GroundTruth,
    threshold: f64,
    scope: PairScope,
) -> Result<RecoveryReport> {
    let p = truth.dim();
    if estimate.dim() != p {
        return Err(QuicError::DimensionMismatch {
            expected: p,
            found: estimate.dim(),
        });
    }
    if !(threshold >= 0.0) {
        return Err(QuicError::InvalidInput(
            "threshold must be non-negative".into(),
        ));
    }
    let (mut tp, mut fp, mut pos, mut neg, mut est) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for i in 0..p {
        for j in 0..p {
            if scope == PairScope::OffDiagonal && i == j {
                continue;
            }
            let predicted = estimate.get(i, j).abs() > threshold;
            let actual = truth.contains(i, j);
            est += predicted as usize;
            match (actual, predicted) {
                (true, true) => {
                    pos += 1;
                    tp += 1;
                }
                (true, false) => pos += 1,
                (false, true) => {
                    neg += 1;
                    fp += 1;
                }
                (false, false) => neg += 1,
            }
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(RecoveryReport {
        tpr: ratio(tp, pos),
        fpr: ratio(fp, neg),
        nnz_estimate: est,
        nnz_truth: pos,
        threshold,
    })
}

/// `(f_t - f_star) / |f_star|`.
pub fn relative_error(f_t: f64, f_star: f64) -> Result<f64> {
    if f_star == 0.0 {
        return Err(QuicError::InvalidInput(
            "relative error undefined for f_star = 0".into(),
        ));
    }
    Ok((f_t - f_star) / f_star.abs())
}
