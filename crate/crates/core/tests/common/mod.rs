//! Test-only oracles and problem builders shared by the integration suites.
#![allow(dead_code)]

use quic_core::{
    chain_precision, cholesky, g_value, random_precision, sample_covariance, sample_gaussian,
    GroundTruth, Problem, SymMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
pub enum Kind {
    Chain,
    Random,
}

/// Ground truth, samples, covariance and a uniform-penalty problem.
pub fn generated(kind: Kind, p: usize, n: usize, lambda: f64, seed: u64) -> (GroundTruth, Problem) {
    let truth = match kind {
        Kind::Chain => chain_precision(p).unwrap(),
        Kind::Random => random_precision(p, (10 * p).min(p * p), seed).unwrap(),
    };
    let data = sample_gaussian(&truth, n, seed.wrapping_add(1000)).unwrap();
    let s = sample_covariance(&data).unwrap();
    (truth, Problem::uniform(s, lambda).unwrap())
}

pub fn random_spd(p: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    // B B^T / p + I keeps the spectrum in a comfortable range.
    let b: Vec<f64> = (0..p * p).map(|_| rng.random_range(-1.0..1.0)).collect();
    SymMatrix::from_upper_fn(p, |i, j| {
        let dot: f64 = (0..p).map(|k| b[i * p + k] * b[j * p + k]).sum();
        dot / p as f64 + if i == j { 1.0 } else { 0.0 }
    })
}

pub fn random_sym(p: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::from_upper_fn(p, |_, _| rng.random_range(-1.0..1.0))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Central finite-difference derivative of `g` with respect to the single
/// entry `X_ij` (for `i != j` the symmetric pair moves together, so the
/// derivative is halved to get the per-entry gradient).
pub fn fd_gradient_entry(prob: &Problem, x: &SymMatrix, i: usize, j: usize) -> f64 {
    let h = 1e-5 * x.get(i, j).abs().max(1.0);
    let eval = |step: f64| {
        let mut y = x.clone();
        y.set(i, j, x.get(i, j) + step);
        g_value(prob, &y, &cholesky(&y).unwrap())
    };
    let d = (eval(h) - eval(-h)) / (2.0 * h);
    if i == j {
        d
    } else {
        0.5 * d
    }
}

/// `vec(D)^T (W kron W) vec(D)` formed entry by entry.
pub fn kron_quadratic_form(w: &SymMatrix, d: &SymMatrix) -> f64 {
    let p = w.dim();
    let vec_d: Vec<f64> = (0..p)
        .flat_map(|c| (0..p).map(move |r| (r, c)))
        .map(|(r, c)| d.get(r, c))
        .collect();
    let mut total = 0.0;
    // (W kron W)[(a, b), (c, e)] = W_ac W_be with vec index col-major: idx = col * p + row
    for col1 in 0..p {
        for row1 in 0..p {
            let v1 = vec_d[col1 * p + row1];
            if v1 == 0.0 {
                continue;
            }
            for col2 in 0..p {
                for row2 in 0..p {
                    total += v1 * w.get(col1, col2) * w.get(row1, row2) * vec_d[col2 * p + row2];
                }
            }
        }
    }
    total
}

/// Brute force `tr(W D W D)` via explicit products.
pub fn trace_wdwd(w: &SymMatrix, d: &SymMatrix) -> f64 {
    let p = w.dim();
    let wd = w.matmul(d);
    let mut t = 0.0;
    for i in 0..p {
        for j in 0..p {
            t += wd[i * p + j] * wd[j * p + i];
        }
    }
    t
}

/// Largest eigenvalue of a symmetric PD matrix by power iteration.
pub fn spectral_norm(x: &SymMatrix) -> f64 {
    let p = x.dim();
    let mut v = vec![1.0 / (p as f64).sqrt(); p];
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let mut next: Vec<f64> = (0..p)
            .map(|i| x.row(i).iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        next.iter_mut().for_each(|a| *a /= norm);
        let converged = (norm - lambda).abs() <= 1e-14 * norm;
        lambda = norm;
        v = next;
        if converged {
            break;
        }
    }
    lambda
}

/// `D W` as a row-major buffer.
pub fn dw_product(d: &SymMatrix, w: &SymMatrix) -> Vec<f64> {
    d.matmul(w)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
