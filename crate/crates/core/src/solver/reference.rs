//! Proximal gradient solver used as an independent correctness oracle.
//!
//! `X+ = soft_threshold(X - eta (S - X^{-1}), eta Lambda)`, with `eta` halved
//! until `X+` is positive definite and the quadratic upper bound on `g`
//! holds, then grown by 1.2 for the next iteration. The decrease test carries
//! a round-off slack, so the objective is monotone up to a few ulps.

use std::time::{Duration, Instant};

use crate::direction::soft_threshold;
use crate::error::{QuicError, Result};
use crate::matrix::{cholesky, trace_product, SymMatrix};
use crate::objective::{g_value, IterateState, Problem};

use super::{l1, normalized_subgradient, Solution, SolverTrace, StopReason, TraceRow};

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    pub time_limit: Option<Duration>,
    pub target_objective: Option<f64>,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 100_000,
            max_backtracks: 60,
            time_limit: None,
            target_objective: None,
        }
    }
}

pub fn solve_reference(
    prob: &Problem,
    x0: Option<&SymMatrix>,
    tol: f64,
    max_iter: usize,
) -> Result<Solution> {
    solve_reference_with(
        prob,
        x0,
        &ReferenceConfig {
            tol,
            max_iter,
            ..Default::default()
        },
    )
}

pub fn solve_reference_with(
    prob: &Problem,
    x0: Option<&SymMatrix>,
    cfg: &ReferenceConfig,
) -> Result<Solution> {
    if !(cfg.tol > 0.0) {
        return Err(QuicError::InvalidInput("tol must be positive".into()));
    }
    let p = prob.dim();
    let start = Instant::now();
    let x0 = x0.cloned().unwrap_or_else(|| SymMatrix::identity(p));
    let mut state = IterateState::new(prob, x0)?;
    let mut subgrad = normalized_subgradient(l1(&state.subgradient(prob)), state.h_val);
    let mut trace = SolverTrace {
        f_initial: state.f_val,
        subgrad_initial: subgrad,
        rows: Vec::new(),
    };

    let s_norm = prob.s().inf_norm();
    let mut eta = if s_norm > 0.0 { 1.0 / s_norm } else { 1.0 };
    let lam = prob.lambda();
    let mut converged = false;
    let mut timed_out = false;
    let mut on_target = false;

    for k in 0..cfg.max_iter {
        if subgrad <= cfg.tol {
            converged = true;
            break;
        }
        if cfg.time_limit.is_some_and(|lim| start.elapsed() >= lim) {
            timed_out = true;
            break;
        }
        let mut accepted = None;
        let mut backtracks = 0;
        while backtracks < cfg.max_backtracks {
            let e = eta;
            let trial = SymMatrix::from_upper_fn(p, |i, j| {
                let z = state.x.get(i, j) - e * state.grad_g.get(i, j);
                soft_threshold(z, e * lam.get(i, j))
            });
            if let Ok(factor) = cholesky(&trial) {
                let step = trial.sub(&state.x);
                let lin = trace_product(&state.grad_g, &step).expect("same dimension");
                let fro2 = step.frobenius_norm().powi(2);
                // Slack for the cancellation in g(X+) - g(X) once steps get tiny.
                let slack = 4.0 * f64::EPSILON * p as f64 * (1.0 + state.g_val.abs());
                let bound = state.g_val + lin + fro2 / (2.0 * e) + slack;
                if g_value(prob, &trial, &factor) <= bound {
                    accepted = Some((trial, factor, lin));
                    break;
                }
            }
            eta *= 0.5;
            backtracks += 1;
        }
        let Some((x_next, factor, lin)) = accepted else {
            return Err(QuicError::LineSearchFailed {
                backtracks,
                delta: f64::NAN,
                trace: Some(Box::new(trace)),
            });
        };
        let h_old = state.h_val;
        state = IterateState::from_factor(prob, x_next, factor);
        subgrad = normalized_subgradient(l1(&state.subgradient(prob)), state.h_val);
        trace.rows.push(TraceRow {
            iter: k,
            f: state.f_val,
            delta: lin + state.h_val - h_old,
            alpha: eta,
            free_size: (0..p)
                .map(|i| (i..p).filter(|&j| state.x.get(i, j) != 0.0).count())
                .sum(),
            sweeps: 0,
            backtracks,
            subgrad,
            seconds: start.elapsed().as_secs_f64(),
        });
        eta *= 1.2;
        if cfg
            .target_objective
            .is_some_and(|target| state.f_val <= target)
        {
            on_target = true;
            break;
        }
    }
    converged = converged || subgrad <= cfg.tol;

    Ok(Solution {
        f_opt: state.f_val,
        x: state.x,
        w: state.w,
        converged,
        stop: if converged {
            StopReason::Converged
        } else if on_target {
            StopReason::TargetReached
        } else if timed_out {
            StopReason::TimeLimit
        } else {
            StopReason::MaxIterations
        },
        iterations: trace.rows.len(),
        subgrad_norm: subgrad,
        blocks: 1,
        trace,
    })
}
