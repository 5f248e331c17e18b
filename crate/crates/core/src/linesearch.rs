//! Armijo backtracking that also enforces positive definiteness.

use crate::error::{QuicError, Result};
use crate::matrix::{cholesky, CholFactor, SymMatrix};
use crate::objective::{f_value, IterateState, Problem};

#[derive(Clone, Debug, PartialEq)]
pub struct LineSearchConfig {
    pub sigma: f64,
    pub beta: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            sigma: 0.25,
            beta: 0.5,
            max_backtracks: 60,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 0.5) {
            return Err(QuicError::InvalidInput(format!(
                "sigma must lie in (0, 0.5), got {}",
                self.sigma
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(QuicError::InvalidInput(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if self.max_backtracks == 0 {
            return Err(QuicError::InvalidInput(
                "max_backtracks must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub alpha: f64,
    pub x_next: SymMatrix,
    /// Factor of `x_next`, reused by the caller to form the next inverse.
    pub factor_next: CholFactor,
    pub f_next: f64,
    pub delta: f64,
    pub backtracks: usize,
}

/// `delta = tr(grad^T D) + ||X + D||_{1,Lambda} - ||X||_{1,Lambda}`.
///
/// Summed entry by entry so the two penalty norms never get subtracted as
/// large totals; near the optimum `delta` is far smaller than either norm.
pub fn compute_delta(prob: &Problem, iterate: &IterateState, d: &SymMatrix) -> f64 {
    assert_eq!(d.dim(), prob.dim(), "direction has problem dimension");
    let x = iterate.x.as_slice();
    let g = iterate.grad_g.as_slice();
    let lam = prob.lambda().as_slice();
    d.as_slice()
        .iter()
        .enumerate()
        .map(|(k, &dk)| g[k] * dk + lam[k] * ((x[k] + dk).abs() - x[k].abs()))
        .sum()
}

/// Tries `alpha = 1, beta, beta^2, ...` and accepts the first step whose
/// point is positive definite and satisfies
/// `f(X + alpha D) <= f(X) + alpha sigma delta`.
pub fn armijo_search(
    prob: &Problem,
    iterate: &IterateState,
    d: &SymMatrix,
    cfg: &LineSearchConfig,
) -> Result<StepResult> {
    let delta = compute_delta(prob, iterate, d);
    let mut alpha = 1.0;
    for backtracks in 0..cfg.max_backtracks {
        let trial = iterate.x.add_scaled(alpha, d);
        // A failed factorization means f = +inf at the trial point.
        if let Ok(factor) = cholesky(&trial) {
            let f_trial = f_value(prob, &trial, &factor);
            if f_trial <= iterate.f_val + alpha * cfg.sigma * delta {
                return Ok(StepResult {
                    alpha,
                    x_next: trial,
                    factor_next: factor,
                    f_next: f_trial,
                    delta,
                    backtracks,
                });
            }
        }
        alpha *= cfg.beta;
    }
    Err(QuicError::LineSearchFailed {
        backtracks: cfg.max_backtracks,
        delta,
        trace: None,
    })
}
