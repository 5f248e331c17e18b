//! Dense symmetric matrices and the Cholesky-based kernels built on them.
//!
//! Both triangles are stored so that row reads in the coordinate-descent
//! inner loop stay contiguous. Every write through [`SymMatrix::set`] is
//! mirrored, which keeps the matrix exactly symmetric at all times.

use std::fmt;

use crate::error::{QuicError, Result};

/// Dense symmetric `p x p` matrix, row-major, both triangles materialized.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    p: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(p: usize) -> Self {
        assert!(p >= 1, "matrix dimension must be at least 1");
        Self {
            p,
            data: vec![0.0; p * p],
        }
    }

    pub fn identity(p: usize) -> Self {
        Self::from_diag(&vec![1.0; p])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.p + i] = d;
        }
        m
    }

    /// Fills the matrix from `f(i, j)` evaluated on the upper triangle (`i <= j`).
    pub fn from_upper_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(p);
        for i in 0..p {
            for j in i..p {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from nested rows. Fails if the rows are ragged or not symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(QuicError::InvalidInput("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(p * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(QuicError::InvalidInput(format!(
                    "row {i} has {} entries, expected {p}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_dense(p, data)
    }

    /// Wraps a row-major buffer, verifying exact symmetry.
    pub fn from_dense(p: usize, data: Vec<f64>) -> Result<Self> {
        if p == 0 || data.len() != p * p {
            return Err(QuicError::InvalidInput(format!(
                "buffer of length {} cannot hold a {p}x{p} matrix",
                data.len()
            )));
        }
        for i in 0..p {
            for j in (i + 1)..p {
                if data[i * p + j] != data[j * p + i] {
                    return Err(QuicError::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { p, data })
    }

    /// Symmetrizes an arbitrary row-major buffer as `(A + A^T) / 2`.
    pub fn symmetrize(p: usize, mut data: Vec<f64>) -> Self {
        assert_eq!(data.len(), p * p);
        for i in 0..p {
            for j in (i + 1)..p {
                let avg = 0.5 * (data[i * p + j] + data[j * p + i]);
                data[i * p + j] = avg;
                data[j * p + i] = avg;
            }
        }
        Self { p, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    /// Writes `(i, j)` and its mirror `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.p + j] = v;
        self.data[j * self.p + i] = v;
    }

    /// Adds `v` to `(i, j)` and, when off-diagonal, to `(j, i)`.
    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.p + j] += v;
        if i != j {
            self.data[j * self.p + i] += v;
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.p).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.p).all(|i| (0..self.p).all(|j| i == j || self.get(i, j) == 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.p, other.p, "dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + alpha * b)
            .collect();
        SymMatrix { p: self.p, data }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, alpha: f64) -> SymMatrix {
        SymMatrix {
            p: self.p,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        SymMatrix {
            p: self.p,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Entrywise combination of two matrices of equal dimension.
    pub fn zip_map(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> SymMatrix {
        assert_eq!(self.p, other.p, "dimension mismatch");
        SymMatrix {
            p: self.p,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        (0..self.p)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Number of entries with magnitude strictly above `threshold`, both triangles counted.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.data.iter().filter(|v| v.abs() > threshold).count()
    }

    /// General matrix product; the result need not be symmetric, so it is
    /// returned as a row-major buffer.
    pub fn matmul(&self, other: &SymMatrix) -> Vec<f64> {
        assert_eq!(self.p, other.p, "dimension mismatch");
        let p = self.p;
        let mut out = vec![0.0; p * p];
        for i in 0..p {
            let out_row = &mut out[i * p..(i + 1) * p];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Principal submatrix on the given index list.
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        let q = idx.len();
        let mut data = Vec::with_capacity(q * q);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        SymMatrix { p: q, data }
    }

    /// Writes `block` into the principal submatrix indexed by `idx`.
    pub fn set_submatrix(&mut self, idx: &[usize], block: &SymMatrix) {
        assert_eq!(idx.len(), block.p);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                self.data[i * self.p + j] = block.get(a, b);
            }
        }
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix({}x{})", self.p, self.p)?;
        for i in 0..self.p {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Lower-triangular Cholesky factor `L` with `L L^T = A`.
#[derive(Clone, Debug)]
pub struct CholFactor {
    p: usize,
    // row-major, upper part is zero
    l: Vec<f64>,
}

impl CholFactor {
    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.p + j]
    }

    pub fn lower(&self) -> &[f64] {
        &self.l
    }

    /// `L y` for a vector `y`.
    pub fn mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.p);
        (0..self.p)
            .map(|i| {
                self.l[i * self.p..i * self.p + i + 1]
                    .iter()
                    .zip(y)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// Cholesky factorization. A pivot that is not strictly positive (or NaN)
/// rejects the matrix; no partial factor escapes.
pub fn cholesky(a: &SymMatrix) -> Result<CholFactor> {
    let p = a.dim();
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let row_j = j * p;
        let mut pivot = a.get(j, j);
        for k in 0..j {
            pivot -= l[row_j + k] * l[row_j + k];
        }
        if !(pivot > 0.0) {
            return Err(QuicError::NotPositiveDefinite { pivot: j });
        }
        let ljj = pivot.sqrt();
        l[row_j + j] = ljj;
        for i in (j + 1)..p {
            let row_i = i * p;
            let dot: f64 = l[row_i..row_i + j]
                .iter()
                .zip(&l[row_j..row_j + j])
                .map(|(x, y)| x * y)
                .sum();
            l[row_i + j] = (a.get(i, j) - dot) / ljj;
        }
    }
    Ok(CholFactor { p, l })
}

/// `log det A = 2 * sum(ln L_ii)`.
pub fn logdet(f: &CholFactor) -> f64 {
    2.0 * (0..f.p).map(|i| f.get(i, i).ln()).sum::<f64>()
}

/// `A^{-1}` from its Cholesky factor, symmetrized to cancel solve asymmetry.
pub fn inverse_from_factor(f: &CholFactor) -> SymMatrix {
    let p = f.p;
    // M = L^{-1}, lower triangular, computed column by column by forward substitution.
    let mut m = vec![0.0; p * p];
    for c in 0..p {
        m[c * p + c] = 1.0 / f.get(c, c);
        for i in (c + 1)..p {
            let mut s = 0.0;
            for k in c..i {
                s += f.get(i, k) * m[k * p + c];
            }
            m[i * p + c] = -s / f.get(i, i);
        }
    }
    // A^{-1} = M^T M; (i, j) = sum_{k >= max(i,j)} M_ki M_kj.
    let mut w = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            let mut s = 0.0;
            for k in j..p {
                s += m[k * p + i] * m[k * p + j];
            }
            w[i * p + j] = s;
            w[j * p + i] = s;
        }
    }
    SymMatrix::symmetrize(p, w)
}

/// `tr(A B) = sum_ij A_ij B_ij` for symmetric `A`, `B`.
pub fn trace_product(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(QuicError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y)
        .sum())
}
