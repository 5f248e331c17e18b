//! The outer proximal Newton loop.
//!
//! Each outer iteration partitions the variables into free and fixed sets,
//! runs coordinate descent on the free set to approximate the Newton
//! direction, and takes an Armijo step that keeps the iterate positive
//! definite. When the thresholded covariance splits into several connected
//! components, each component is iterated as an independent block and the
//! blocks advance in lockstep.

mod reference;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::activeset::{partition, threshold_pattern, Partition};
use crate::direction::{
    diagonal_closed_form, newton_direction_with, SweepControl, DEFAULT_STAGNATION_TOL,
};
use crate::error::{QuicError, Result};
use crate::linesearch::{armijo_search, compute_delta, LineSearchConfig};
use crate::matrix::{cholesky, logdet, SymMatrix};
use crate::objective::{f_value, IterateState, Problem};

pub use reference::{solve_reference, solve_reference_with, ReferenceConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub line_search: LineSearchConfig,
    /// Threshold on the normalized minimum-norm subgradient.
    pub outer_tol: f64,
    pub max_outer: usize,
    /// Sweeps at outer iteration `t` are `ceil(rate * (t + 1))`, clamped to
    /// `[inner_min_sweeps, inner_max_sweeps]`.
    pub inner_schedule_rate: f64,
    pub inner_min_sweeps: usize,
    pub inner_max_sweeps: usize,
    /// Early exit from the inner loop, see [`SweepControl::stagnation_tol`].
    pub inner_stagnation_tol: f64,
    pub seed: u64,
    pub use_block_decomposition: bool,
    pub coordinate_permutation: bool,
    pub time_limit: Option<Duration>,
    /// Stop as soon as `f` drops to this value.
    pub target_objective: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            line_search: LineSearchConfig::default(),
            outer_tol: 1e-6,
            max_outer: 200,
            inner_schedule_rate: 1.0 / 3.0,
            inner_min_sweeps: 1,
            inner_max_sweeps: usize::MAX,
            inner_stagnation_tol: DEFAULT_STAGNATION_TOL,
            seed: 0,
            use_block_decomposition: true,
            coordinate_permutation: false,
            time_limit: None,
            target_objective: None,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.outer_tol = tol;
        self
    }

    /// Same number of sweeps at every outer iteration.
    pub fn with_fixed_sweeps(mut self, sweeps: usize) -> Self {
        self.inner_min_sweeps = sweeps;
        self.inner_max_sweeps = sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.line_search.validate()?;
        if !(self.outer_tol > 0.0) {
            return Err(QuicError::InvalidInput("outer_tol must be positive".into()));
        }
        if !(self.inner_schedule_rate > 0.0) {
            return Err(QuicError::InvalidInput(
                "inner_schedule_rate must be positive".into(),
            ));
        }
        if self.inner_min_sweeps == 0 || self.inner_max_sweeps < self.inner_min_sweeps {
            return Err(QuicError::InvalidInput(
                "need 1 <= inner_min_sweeps <= inner_max_sweeps".into(),
            ));
        }
        if self.max_outer == 0 {
            return Err(QuicError::InvalidInput("max_outer must be positive".into()));
        }
        Ok(())
    }

    /// Inner sweep budget at outer iteration `t` (0-based).
    pub fn sweep_budget(&self, t: usize) -> usize {
        let raw = (self.inner_schedule_rate * (t + 1) as f64).ceil();
        let raw = if raw >= usize::MAX as f64 {
            usize::MAX
        } else {
            raw as usize
        };
        raw.clamp(self.inner_min_sweeps, self.inner_max_sweeps)
    }
}

/// One row per outer iteration; `f` and `subgrad` describe the point reached
/// at the end of the iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub f: f64,
    pub delta: f64,
    pub alpha: f64,
    pub free_size: usize,
    pub sweeps: usize,
    pub backtracks: usize,
    pub subgrad: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub f_initial: f64,
    pub subgrad_initial: f64,
    pub rows: Vec<TraceRow>,
}

impl SolverTrace {
    /// Objective values `f(X_0), f(X_1), ...`.
    pub fn objective_path(&self) -> Vec<f64> {
        std::iter::once(self.f_initial)
            .chain(self.rows.iter().map(|r| r.f))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Why the outer loop ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    TimeLimit,
    /// `f` reached the configured target objective.
    TargetReached,
    /// The predicted decrease fell below what `f64` can resolve in `f`, so no
    /// further step could be verified by the line search.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: SymMatrix,
    pub w: SymMatrix,
    pub f_opt: f64,
    pub converged: bool,
    pub stop: StopReason,
    pub iterations: usize,
    /// Normalized minimum-norm subgradient at `x`.
    pub subgrad_norm: f64,
    /// Number of independent blocks the problem was split into.
    pub blocks: usize,
    pub trace: SolverTrace,
}

/// What an observer sees once per block per outer iteration, after the
/// direction is computed and before the line search.
pub struct IterationView<'a> {
    pub iter: usize,
    pub block: usize,
    /// Global indices of this block's nodes; the matrices below use local indices.
    pub nodes: &'a [usize],
    pub prob: &'a Problem,
    pub iterate: &'a IterateState,
    pub partition: &'a Partition,
    pub direction: &'a SymMatrix,
}

/// Stopping measure: `sum |subgrad| / max(1, ||X||_{1,Lambda})`.
pub fn normalized_subgradient(l1_subgrad: f64, h_val: f64) -> f64 {
    l1_subgrad / h_val.max(1.0)
}

/// Smallest decrease of `f` that can be told apart from rounding in its
/// evaluation at `st`.
fn roundoff_floor(st: &IterateState) -> f64 {
    let ld = logdet(&st.factor);
    let scale = ld.abs() + (st.g_val + ld).abs() + st.h_val;
    4.0 * f64::EPSILON * scale.max(1.0)
}

fn l1(m: &SymMatrix) -> f64 {
    m.as_slice().iter().map(|v| v.abs()).sum()
}

struct Block {
    nodes: Vec<usize>,
    prob: Problem,
    state: IterateState,
    subgrad_l1: f64,
    stalled: bool,
}

impl Block {
    fn new(nodes: Vec<usize>, prob: Problem, x0: SymMatrix) -> Result<Self> {
        let state = IterateState::new(&prob, x0)?;
        let subgrad_l1 = l1(&state.subgradient(&prob));
        Ok(Self {
            nodes,
            prob,
            state,
            subgrad_l1,
            stalled: false,
        })
    }
}

/// Contribution of a 1x1 block solved in closed form: `x = 1 / (s + lambda)`.
struct Singleton {
    node: usize,
    x: f64,
    f: f64,
    h: f64,
}

impl Singleton {
    fn new(prob: &Problem, node: usize) -> Result<Self> {
        let s = prob.s().get(node, node);
        let l = prob.lambda().get(node, node);
        let denom = s + l;
        if !(denom > 0.0) {
            return Err(QuicError::InvalidInput(format!(
                "objective is unbounded below: S_ii + lambda_ii = {denom} at index {node}"
            )));
        }
        let x = 1.0 / denom;
        Ok(Self {
            node,
            x,
            f: denom.ln() + 1.0,
            h: l * x,
        })
    }
}

/// Solves the problem with the default (identity) starting point when `x0` is `None`.
pub fn solve_quic(prob: &Problem, x0: Option<&SymMatrix>, cfg: &SolverConfig) -> Result<Solution> {
    solve_quic_observed(prob, x0, cfg, |_| {})
}

/// [`solve_quic`] with a callback invoked at every block iteration.
pub fn solve_quic_observed<F>(
    prob: &Problem,
    x0: Option<&SymMatrix>,
    cfg: &SolverConfig,
    mut observer: F,
) -> Result<Solution>
where
    F: FnMut(&IterationView<'_>),
{
    cfg.validate()?;
    let p = prob.dim();
    let start = Instant::now();
    let x0 = match x0 {
        Some(x) => {
            if x.dim() != p {
                return Err(QuicError::DimensionMismatch {
                    expected: p,
                    found: x.dim(),
                });
            }
            cholesky(x)?;
            x.clone()
        }
        None => SymMatrix::identity(p),
    };

    let groups = if cfg.use_block_decomposition {
        threshold_pattern(prob.s(), prob.lambda()).blocks
    } else {
        vec![(0..p).collect()]
    };
    let n_groups = groups.len();

    let mut blocks = Vec::new();
    let mut singletons = Vec::new();
    for nodes in groups {
        if nodes.len() == 1 && n_groups > 1 {
            singletons.push(Singleton::new(prob, nodes[0])?);
        } else {
            let sub = if n_groups == 1 {
                prob.clone()
            } else {
                prob.subproblem(&nodes)
            };
            let x_sub = if n_groups == 1 {
                x0.clone()
            } else {
                x0.submatrix(&nodes)
            };
            blocks.push(Block::new(nodes, sub, x_sub)?);
        }
    }

    let single_f: f64 = singletons.iter().map(|s| s.f).sum();
    let single_h: f64 = singletons.iter().map(|s| s.h).sum();
    let total_f = |blocks: &[Block]| single_f + blocks.iter().map(|b| b.state.f_val).sum::<f64>();
    let total_h = |blocks: &[Block]| single_h + blocks.iter().map(|b| b.state.h_val).sum::<f64>();
    let total_l1 = |blocks: &[Block]| blocks.iter().map(|b| b.subgrad_l1).sum::<f64>();

    let mut trace = SolverTrace {
        f_initial: total_f(&blocks),
        subgrad_initial: normalized_subgradient(total_l1(&blocks), total_h(&blocks)),
        rows: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut converged = false;
    let mut timed_out = false;
    let mut stuck = false;
    let mut on_target = false;

    for t in 0..cfg.max_outer {
        let h_all = total_h(&blocks);
        if normalized_subgradient(total_l1(&blocks), h_all) <= cfg.outer_tol {
            converged = true;
            break;
        }
        if cfg.time_limit.is_some_and(|lim| start.elapsed() >= lim) {
            timed_out = true;
            break;
        }
        // A block whose share of the stopping measure is already small enough sits out.
        let block_tol = cfg.outer_tol * h_all.max(1.0) / n_groups as f64;
        let control = SweepControl {
            sweeps: cfg.sweep_budget(t),
            stagnation_tol: cfg.inner_stagnation_tol,
        };

        let mut row = TraceRow {
            iter: t,
            f: 0.0,
            delta: 0.0,
            alpha: f64::INFINITY,
            free_size: 0,
            sweeps: 0,
            backtracks: 0,
            subgrad: 0.0,
            seconds: 0.0,
        };
        let mut moved = false;
        for (bi, block) in blocks.iter_mut().enumerate() {
            if block.stalled || block.subgrad_l1 <= block_tol {
                continue;
            }
            let st = &block.state;
            let part = partition(&st.x, &st.grad_g, block.prob.lambda());
            let (d, sweeps) = if st.x.is_diagonal() {
                (diagonal_closed_form(&block.prob, &st.x, &st.w), 1)
            } else {
                let rng = cfg.coordinate_permutation.then_some(&mut rng);
                let ds = newton_direction_with(&block.prob, st, &part.free, &control, rng);
                let n = ds.sweep_count;
                (ds.into_direction(), n)
            };
            observer(&IterationView {
                iter: t,
                block: bi,
                nodes: &block.nodes,
                prob: &block.prob,
                iterate: st,
                partition: &part,
                direction: &d,
            });
            row.free_size += part.free.len();
            row.sweeps = row.sweeps.max(sweeps);
            if d.is_zero() {
                continue;
            }
            if -compute_delta(&block.prob, st, &d) <= roundoff_floor(st) {
                block.stalled = true;
                continue;
            }
            let step = match armijo_search(&block.prob, st, &d, &cfg.line_search) {
                Ok(step) => step,
                Err(QuicError::LineSearchFailed {
                    backtracks, delta, ..
                }) => {
                    return Err(QuicError::LineSearchFailed {
                        backtracks,
                        delta,
                        trace: Some(Box::new(trace)),
                    })
                }
                Err(e) => return Err(e),
            };
            if step.f_next >= st.f_val {
                block.stalled = true;
                continue;
            }
            row.delta += step.delta;
            row.alpha = row.alpha.min(step.alpha);
            row.backtracks += step.backtracks;
            block.state = IterateState::from_factor(&block.prob, step.x_next, step.factor_next);
            block.subgrad_l1 = l1(&block.state.subgradient(&block.prob));
            moved = true;
        }
        if !moved {
            stuck = true;
            break;
        }
        row.f = total_f(&blocks);
        row.subgrad = normalized_subgradient(total_l1(&blocks), total_h(&blocks));
        row.seconds = start.elapsed().as_secs_f64();
        let f_now = row.f;
        trace.rows.push(row);
        if cfg.target_objective.is_some_and(|target| f_now <= target) {
            on_target = true;
            break;
        }
    }

    let subgrad_norm = normalized_subgradient(total_l1(&blocks), total_h(&blocks));
    converged = converged || subgrad_norm <= cfg.outer_tol;
    let stop = if converged {
        StopReason::Converged
    } else if on_target {
        StopReason::TargetReached
    } else if timed_out {
        StopReason::TimeLimit
    } else if stuck {
        StopReason::Stalled
    } else {
        StopReason::MaxIterations
    };

    let (x, w) = if n_groups == 1 {
        let b = blocks.pop().expect("one block");
        (b.state.x, b.state.w)
    } else {
        let mut x = SymMatrix::zeros(p);
        let mut w = SymMatrix::zeros(p);
        for b in &blocks {
            x.set_submatrix(&b.nodes, &b.state.x);
            w.set_submatrix(&b.nodes, &b.state.w);
        }
        for s in &singletons {
            x.set(s.node, s.node, s.x);
            w.set(s.node, s.node, 1.0 / s.x);
        }
        (x, w)
    };
    let f_opt = trace.rows.last().map_or(trace.f_initial, |r| r.f);
    Ok(Solution {
        x,
        w,
        f_opt,
        converged,
        stop,
        iterations: trace.rows.len(),
        subgrad_norm,
        blocks: n_groups,
        trace,
    })
}

/// Duality gap `f(X) - log det W~ - p` at the dual point obtained by clipping
/// `W` into `[S - Lambda, S + Lambda]`. `None` when the clipped matrix (or `X`)
/// is not positive definite.
pub fn duality_gap(prob: &Problem, x: &SymMatrix, w: &SymMatrix) -> Option<f64> {
    let s = prob.s();
    let lam = prob.lambda();
    let p = prob.dim();
    let clipped = SymMatrix::from_upper_fn(p, |i, j| {
        let (lo, hi) = (s.get(i, j) - lam.get(i, j), s.get(i, j) + lam.get(i, j));
        w.get(i, j).clamp(lo, hi)
    });
    let dual_factor = cholesky(&clipped).ok()?;
    let primal_factor = cholesky(x).ok()?;
    Some(f_value(prob, x, &primal_factor) - logdet(&dual_factor) - p as f64)
}
