//! Newton direction of the regularized quadratic model, computed by cyclic
//! coordinate descent over a free set.
//!
//! The quadratic term `1/2 tr(W D W D)` couples all coordinates through the
//! Hessian `W (x) W`. A single coordinate update only needs the `(i, j)` entry
//! of `W D W`, which is read off the cache `U = D W` in `O(p)`; after the update
//! two rows of `U` are refreshed, again in `O(p)`.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::matrix::SymMatrix;
use crate::objective::{h_value, IterateState, Problem};

/// `sign(z) * max(|z| - r, 0)`.
#[inline]
pub fn soft_threshold(z: f64, r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    if z > r {
        z - r
    } else if z < -r {
        z + r
    } else {
        0.0
    }
}

/// Direction accumulator `D` together with the cache `U = D W`.
#[derive(Clone, Debug)]
pub struct DirectionState {
    pub d: SymMatrix,
    /// Row-major `p x p`; not symmetric in general.
    u: Vec<f64>,
    pub sweep_count: usize,
}

impl DirectionState {
    pub fn new(p: usize) -> Self {
        Self {
            d: SymMatrix::zeros(p),
            u: vec![0.0; p * p],
            sweep_count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.d.dim()
    }

    /// The cache `U`, row-major.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn into_direction(self) -> SymMatrix {
        self.d
    }
}

/// One coordinate step on `D_ij` (and its mirror). Returns the applied change `mu`.
#[allow(clippy::too_many_arguments)]
pub fn coord_update(
    state: &mut DirectionState,
    i: usize,
    j: usize,
    x: &SymMatrix,
    w: &SymMatrix,
    s: &SymMatrix,
    lambda: &SymMatrix,
) -> f64 {
    debug_assert!(i <= j);
    let p = state.dim();
    let wij = w.get(i, j);
    let wii = w.get(i, i);
    let a = if i == j {
        wii * wii
    } else {
        wij * wij + wii * w.get(j, j)
    };

    // (W D W)_ij = row i of W . column j of U
    let u = &state.u;
    let wdw: f64 = w
        .row(i)
        .iter()
        .enumerate()
        .map(|(k, &wik)| wik * u[k * p + j])
        .sum();
    let b = s.get(i, j) - wij + wdw;
    let c = x.get(i, j) + state.d.get(i, j);
    let mu = -c + soft_threshold(c - b / a, lambda.get(i, j) / a);

    if mu != 0.0 {
        state.d.add_at(i, j, mu);
        let u = &mut state.u;
        for (uk, &wk) in u[i * p..(i + 1) * p].iter_mut().zip(w.row(j)) {
            *uk += mu * wk;
        }
        if i != j {
            for (uk, &wk) in u[j * p..(j + 1) * p].iter_mut().zip(w.row(i)) {
                *uk += mu * wk;
            }
        }
    }
    mu
}

/// Exact Newton direction when `X` (and hence `W`) is diagonal: the Hessian is
/// diagonal, so every coordinate is solved independently in `O(1)`.
pub fn diagonal_closed_form(prob: &Problem, x: &SymMatrix, w: &SymMatrix) -> SymMatrix {
    let p = prob.dim();
    let s = prob.s();
    let lam = prob.lambda();
    SymMatrix::from_upper_fn(p, |i, j| {
        if i == j {
            let wii = w.get(i, i);
            let a = wii * wii;
            let xii = x.get(i, i);
            -xii + soft_threshold(xii - (s.get(i, i) - wii) / a, lam.get(i, i) / a)
        } else {
            let a = w.get(i, i) * w.get(j, j);
            soft_threshold(-s.get(i, j) / a, lam.get(i, j) / a)
        }
    })
}

/// Inner-loop controls for [`newton_direction_with`].
#[derive(Clone, Debug)]
pub struct SweepControl {
    pub sweeps: usize,
    /// Stop after a sweep whose largest `|mu|` is at most this fraction of `max |D|`.
    pub stagnation_tol: f64,
}

impl SweepControl {
    pub fn exact(sweeps: usize) -> Self {
        Self {
            sweeps,
            stagnation_tol: 0.0,
        }
    }
}

/// Default stagnation tolerance for inner sweeps.
pub const DEFAULT_STAGNATION_TOL: f64 = 1e-4;

/// Runs up to `sweeps` passes of [`coord_update`] over `free_set` starting
/// from `D = 0`. With `shuffle` set, each sweep visits the free set in a
/// fresh random order.
pub fn newton_direction_with(
    prob: &Problem,
    iterate: &IterateState,
    free_set: &[(usize, usize)],
    control: &SweepControl,
    mut shuffle: Option<&mut ChaCha8Rng>,
) -> DirectionState {
    let p = prob.dim();
    let mut state = DirectionState::new(p);
    if free_set.is_empty() {
        return state;
    }
    let mut order: Vec<(usize, usize)> = free_set.to_vec();
    let (x, w, s, lam) = (&iterate.x, &iterate.w, prob.s(), prob.lambda());
    for _ in 0..control.sweeps.max(1) {
        if let Some(rng) = shuffle.as_deref_mut() {
            order.shuffle(rng);
        }
        let mut max_step = 0.0_f64;
        for &(i, j) in &order {
            let mu = coord_update(&mut state, i, j, x, w, s, lam);
            max_step = max_step.max(mu.abs());
        }
        state.sweep_count += 1;
        if max_step <= control.stagnation_tol * state.d.max_abs() {
            break;
        }
    }
    state
}

/// Newton direction restricted to `free_set` after `sweeps` full passes in
/// row-major order.
pub fn newton_direction(
    prob: &Problem,
    iterate: &IterateState,
    free_set: &[(usize, usize)],
    sweeps: usize,
) -> SymMatrix {
    newton_direction_with(prob, iterate, free_set, &SweepControl::exact(sweeps), None)
        .into_direction()
}

/// Value of the quadratic model `tr(grad D) + 1/2 tr(W D W D) + h(X + D)`,
/// dropping the constant `g(X)`. Costs `O(p^3)`; meant for diagnostics.
pub fn model_value(prob: &Problem, iterate: &IterateState, d: &SymMatrix) -> f64 {
    let p = prob.dim();
    let lin: f64 = iterate
        .grad_g
        .as_slice()
        .iter()
        .zip(d.as_slice())
        .map(|(g, v)| g * v)
        .sum();
    let wd = iterate.w.matmul(d);
    // tr(WD WD) = sum_ij (WD)_ij (WD)_ji
    let mut quad = 0.0;
    for i in 0..p {
        for j in 0..p {
            quad += wd[i * p + j] * wd[j * p + i];
        }
    }
    lin + 0.5 * quad + h_value(prob, &iterate.x.add_scaled(1.0, d))
}
