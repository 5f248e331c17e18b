//! Sample covariance and synthetic Gaussian Markov random field generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{QuicError, Result};
use crate::matrix::{cholesky, inverse_from_factor, SymMatrix};

/// Generator used for every seeded draw in this crate. Recorded in run manifests.
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.9), normals by ziggurat (rand_distr 0.5)";

/// `n x p` observations, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(n: usize, p: usize, y: Vec<f64>) -> Result<Self> {
        if p == 0 || y.len() != n * p {
            return Err(QuicError::InvalidInput(format!(
                "{} values cannot form a {n} x {p} dataset",
                y.len()
            )));
        }
        Ok(Self { n, p, y })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.y[k * self.p..(k + 1) * self.p]
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }
}

/// A precision matrix together with its exact nonzero pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub precision: SymMatrix,
    /// Upper-triangular nonzero pairs `(i, j)`, `i <= j`.
    pub pattern: Vec<(usize, usize)>,
}

impl GroundTruth {
    pub fn from_precision(precision: SymMatrix) -> Self {
        let p = precision.dim();
        let pattern = (0..p)
            .flat_map(|i| (i..p).map(move |j| (i, j)))
            .filter(|&(i, j)| precision.get(i, j) != 0.0)
            .collect();
        Self { precision, pattern }
    }

    pub fn dim(&self) -> usize {
        self.precision.dim()
    }

    /// Nonzeros over the full matrix, both triangles counted.
    pub fn nnz(&self) -> usize {
        self.pattern
            .iter()
            .map(|&(i, j)| if i == j { 1 } else { 2 })
            .sum()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.precision.get(i, j) != 0.0
    }
}

/// `S = 1/(n-1) sum_k (y_k - m)(y_k - m)^T` with `m` the sample mean.
pub fn sample_covariance(data: &Dataset) -> Result<SymMatrix> {
    let (n, p) = (data.n, data.p);
    if n < 2 {
        return Err(QuicError::InsufficientSamples(n));
    }
    let mut mean = vec![0.0; p];
    for k in 0..n {
        for (m, v) in mean.iter_mut().zip(data.sample(k)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut acc = vec![0.0; p * p];
    let mut centered = vec![0.0; p];
    for k in 0..n {
        for ((c, v), m) in centered.iter_mut().zip(data.sample(k)).zip(&mean) {
            *c = v - m;
        }
        for i in 0..p {
            let ci = centered[i];
            for j in i..p {
                acc[i * p + j] += ci * centered[j];
            }
        }
    }
    let scale = 1.0 / (n - 1) as f64;
    Ok(SymMatrix::from_upper_fn(p, |i, j| acc[i * p + j] * scale))
}

/// Tridiagonal chain precision: 1.25 on the diagonal, -0.5 next to it.
pub fn chain_precision(p: usize) -> Result<GroundTruth> {
    if p < 2 {
        return Err(QuicError::InvalidInput("chain graph needs p >= 2".into()));
    }
    let m = SymMatrix::from_upper_fn(p, |i, j| match j - i {
        0 => 1.25,
        1 => -0.5,
        _ => 0.0,
    });
    Ok(GroundTruth::from_precision(m))
}

fn gram_with_shift(p: usize, positions: &[(usize, usize, f64)]) -> SymMatrix {
    // rows of U -> list of (column, sign)
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p];
    for &(r, c, v) in positions {
        rows[r].push((c, v));
    }
    let mut a = vec![0.0; p * p];
    for row in &rows {
        for &(ci, vi) in row {
            for &(cj, vj) in row {
                a[ci * p + cj] += vi * vj;
            }
        }
    }
    let min_bound = (0..p)
        .map(|i| {
            let off: f64 = (0..p).filter(|&j| j != i).map(|j| a[i * p + j].abs()).sum();
            a[i * p + i] - off
        })
        .fold(f64::INFINITY, f64::min);
    let tau = min_bound.abs() + 1.0;
    for i in 0..p {
        a[i * p + i] += tau;
    }
    SymMatrix::from_dense(p, a).expect("gram matrix is symmetric")
}

/// Random sparse precision `U^T U + tau I` where `U` has `+-1` entries at
/// uniformly random positions. The number of entries of `U` is tuned so the
/// result has roughly `target_nnz` nonzeros; `tau` comes from the Gershgorin
/// bound so the matrix is positive definite.
pub fn random_precision(p: usize, target_nnz: usize, seed: u64) -> Result<GroundTruth> {
    if p == 0 || target_nnz < p || target_nnz > p * p {
        return Err(QuicError::InfeasibleTarget {
            target: target_nnz,
            p,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<(usize, usize)> = (0..p).flat_map(|r| (0..p).map(move |c| (r, c))).collect();
    cells.shuffle(&mut rng);
    let entries: Vec<(usize, usize, f64)> = cells
        .into_iter()
        .map(|(r, c)| (r, c, if rng.random_bool(0.5) { 1.0 } else { -1.0 }))
        .collect();

    let nnz_for = |m: usize| gram_with_shift(p, &entries[..m]).count_above(0.0);
    // Smallest prefix reaching the target, assuming nnz grows with the prefix.
    let (mut lo, mut hi) = (0usize, entries.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if nnz_for(mid) < target_nnz {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let mut m = lo;
    if m > 0 && target_nnz.abs_diff(nnz_for(m - 1)) < target_nnz.abs_diff(nnz_for(m)) {
        m -= 1;
    }
    Ok(GroundTruth::from_precision(gram_with_shift(
        p,
        &entries[..m],
    )))
}

/// Draws `n` samples from `N(0, precision^{-1})`.
pub fn sample_gaussian(truth: &GroundTruth, n: usize, seed: u64) -> Result<Dataset> {
    let p = truth.dim();
    let sigma = inverse_from_factor(&cholesky(&truth.precision)?);
    let l = cholesky(&sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = Vec::with_capacity(n * p);
    let mut z = vec![0.0; p];
    for _ in 0..n {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        y.extend(l.mul_vec(&z));
    }
    Dataset::new(n, p, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn covariance_of_two_points() {
        let d = Dataset::new(2, 2, vec![1.0, 0.0, -1.0, 0.0]).unwrap();
        let s = sample_covariance(&d).unwrap();
        assert_eq!(s, SymMatrix::from_diag(&[2.0, 0.0]));
    }

    #[test]
    fn covariance_of_identical_samples_is_zero() {
        let d = Dataset::new(3, 2, vec![0.5, -2.0, 0.5, -2.0, 0.5, -2.0]).unwrap();
        assert!(sample_covariance(&d).unwrap().is_zero());
    }

    #[test]
    fn covariance_needs_two_samples() {
        let d = Dataset::new(1, 2, vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            sample_covariance(&d),
            Err(QuicError::InsufficientSamples(1))
        ));
    }

    #[test]
    fn covariance_is_psd() {
        let truth = chain_precision(6).unwrap();
        let d = sample_gaussian(&truth, 40, 5).unwrap();
        let s = sample_covariance(&d).unwrap();
        // PSD oracle: S + eps I must factor.
        let shifted = s.add_scaled(1e-10, &SymMatrix::identity(6));
        assert!(cholesky(&shifted).is_ok());
    }

    #[test]
    fn chain_definition() {
        let t = chain_precision(2).unwrap();
        assert_eq!(
            t.precision,
            SymMatrix::from_rows(&[vec![1.25, -0.5], vec![-0.5, 1.25]]).unwrap()
        );
        for p in [2, 10, 1000] {
            let t = chain_precision(p).unwrap();
            assert_eq!(t.nnz(), 3 * p - 2);
            assert!(cholesky(&t.precision).is_ok());
        }
        let t = chain_precision(7).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(t.contains(i, j), i.abs_diff(j) <= 1);
            }
        }
    }

    #[test]
    fn random_precision_is_pd_and_calibrated() {
        for seed in 0..20 {
            let t = random_precision(50, 500, seed).unwrap();
            assert!(cholesky(&t.precision).is_ok());
        }
        let t = random_precision(100, 1000, 1).unwrap();
        let nnz = t.nnz() as f64;
        assert!((nnz - 1000.0).abs() <= 200.0, "nnz = {nnz}");
        assert_eq!(t.nnz(), t.precision.count_above(0.0));
    }

    #[test]
    fn random_precision_is_seed_deterministic() {
        let a = random_precision(30, 300, 9).unwrap();
        let b = random_precision(30, 300, 9).unwrap();
        assert_eq!(a, b);
        let c = random_precision(30, 300, 10).unwrap();
        assert_ne!(a, c);
        assert!(random_precision(30, 10, 1).is_err());
        assert!(random_precision(30, 901, 1).is_err());
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let t = chain_precision(4).unwrap();
        assert_eq!(
            sample_gaussian(&t, 10, 3).unwrap(),
            sample_gaussian(&t, 10, 3).unwrap()
        );
    }

    #[test]
    fn empirical_moments_match() {
        let t = chain_precision(2).unwrap();
        let n = 100_000;
        let d = sample_gaussian(&t, n, 42).unwrap();
        let sigma = inverse_from_factor(&cholesky(&t.precision).unwrap());
        let s = sample_covariance(&d).unwrap();
        for i in 0..2 {
            let mean: f64 = (0..n).map(|k| d.sample(k)[i]).sum::<f64>() / n as f64;
            assert!(mean.abs() <= 4.0 / (n as f64).sqrt(), "mean {mean}");
            for j in 0..2 {
                // var(s_ij) = (sigma_ij^2 + sigma_ii sigma_jj) / n for Gaussian data
                let se = ((sigma.get(i, j).powi(2) + sigma.get(i, i) * sigma.get(j, j)) / n as f64)
                    .sqrt();
                assert!(
                    (s.get(i, j) - sigma.get(i, j)).abs() <= 3.0 * se,
                    "({i},{j}): {} vs {}",
                    s.get(i, j),
                    sigma.get(i, j)
                );
            }
        }
        assert_relative_eq!(sigma.get(0, 0), 1.25 / 1.3125, epsilon = 1e-14);
    }
}
