//! The composite objective `f(X) = g(X) + h(X)` with
//! `g(X) = -log det X + tr(S X)` and `h(X) = sum_ij lambda_ij |X_ij|`.

use crate::error::{QuicError, Result};
use crate::matrix::{cholesky, inverse_from_factor, logdet, trace_product, CholFactor, SymMatrix};

/// Sample covariance plus the entrywise penalty weights.
#[derive(Clone, Debug)]
pub struct Problem {
    s: SymMatrix,
    lambda: SymMatrix,
}

impl Problem {
    /// Validates dimensions and the penalty: symmetric, non-negative, and
    /// strictly positive off the diagonal.
    pub fn new(s: SymMatrix, lambda: SymMatrix) -> Result<Self> {
        if s.dim() != lambda.dim() {
            return Err(QuicError::DimensionMismatch {
                expected: s.dim(),
                found: lambda.dim(),
            });
        }
        let p = s.dim();
        for i in 0..p {
            for j in i..p {
                let l = lambda.get(i, j);
                if !l.is_finite() || l < 0.0 {
                    return Err(QuicError::InvalidInput(format!(
                        "penalty ({i}, {j}) = {l} must be finite and non-negative"
                    )));
                }
                if i != j && l == 0.0 {
                    return Err(QuicError::InvalidInput(format!(
                        "off-diagonal penalty ({i}, {j}) must be strictly positive"
                    )));
                }
                if !s.get(i, j).is_finite() {
                    return Err(QuicError::InvalidInput(format!(
                        "covariance entry ({i}, {j}) is not finite"
                    )));
                }
            }
        }
        Ok(Self { s, lambda })
    }

    /// Uniform penalty `lambda` on every entry, diagonal included.
    pub fn uniform(s: SymMatrix, lambda: f64) -> Result<Self> {
        let p = s.dim();
        Self::new(s, SymMatrix::from_upper_fn(p, |_, _| lambda))
    }

    /// Penalty `lambda` on off-diagonal entries, zero on the diagonal.
    pub fn off_diagonal(s: SymMatrix, lambda: f64) -> Result<Self> {
        let p = s.dim();
        Self::new(
            s,
            SymMatrix::from_upper_fn(p, |i, j| if i == j { 0.0 } else { lambda }),
        )
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn s(&self) -> &SymMatrix {
        &self.s
    }

    pub fn lambda(&self) -> &SymMatrix {
        &self.lambda
    }

    /// Restriction to a principal index set.
    pub fn subproblem(&self, idx: &[usize]) -> Problem {
        Problem {
            s: self.s.submatrix(idx),
            lambda: self.lambda.submatrix(idx),
        }
    }

    /// Indices where the covariance has a negative diagonal entry. Such an
    /// input is not a covariance; callers usually warn about it.
    pub fn negative_diagonal(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.s.get(i, i) < 0.0)
            .collect()
    }
}

pub fn g_value(prob: &Problem, x: &SymMatrix, factor: &CholFactor) -> f64 {
    -logdet(factor) + trace_product(prob.s(), x).expect("dimension checked by caller")
}

/// Weighted l1 norm over all `p^2` ordered pairs.
pub fn h_value(prob: &Problem, x: &SymMatrix) -> f64 {
    prob.lambda()
        .as_slice()
        .iter()
        .zip(x.as_slice())
        .map(|(l, v)| l * v.abs())
        .sum()
}

pub fn f_value(prob: &Problem, x: &SymMatrix, factor: &CholFactor) -> f64 {
    g_value(prob, x, factor) + h_value(prob, x)
}

/// `S - W` where `W = X^{-1}`.
pub fn gradient_g(prob: &Problem, w: &SymMatrix) -> SymMatrix {
    prob.s().sub(w)
}

/// Smallest-magnitude element of the subdifferential of `f`, entrywise.
pub fn min_norm_subgradient(prob: &Problem, x: &SymMatrix, grad_g: &SymMatrix) -> SymMatrix {
    let p = prob.dim();
    SymMatrix::from_upper_fn(p, |i, j| {
        let g = grad_g.get(i, j);
        let l = prob.lambda().get(i, j);
        let v = x.get(i, j);
        if v > 0.0 {
            g + l
        } else if v < 0.0 {
            g - l
        } else {
            g.signum() * (g.abs() - l).max(0.0)
        }
    })
}

/// Everything the outer loop knows about the current point.
#[derive(Clone, Debug)]
pub struct IterateState {
    pub x: SymMatrix,
    pub w: SymMatrix,
    pub factor: CholFactor,
    pub f_val: f64,
    pub g_val: f64,
    pub h_val: f64,
    pub grad_g: SymMatrix,
}

impl IterateState {
    /// Factors `x` and evaluates the objective. Fails if `x` is not positive definite.
    pub fn new(prob: &Problem, x: SymMatrix) -> Result<Self> {
        if x.dim() != prob.dim() {
            return Err(QuicError::DimensionMismatch {
                expected: prob.dim(),
                found: x.dim(),
            });
        }
        let factor = cholesky(&x)?;
        Ok(Self::from_factor(prob, x, factor))
    }

    /// Builds the state from an already computed factor of `x`.
    pub fn from_factor(prob: &Problem, x: SymMatrix, factor: CholFactor) -> Self {
        let w = inverse_from_factor(&factor);
        let g_val = g_value(prob, &x, &factor);
        let h_val = h_value(prob, &x);
        let grad_g = gradient_g(prob, &w);
        Self {
            x,
            w,
            factor,
            f_val: g_val + h_val,
            g_val,
            h_val,
            grad_g,
        }
    }

    pub fn subgradient(&self, prob: &Problem) -> SymMatrix {
        min_norm_subgradient(prob, &self.x, &self.grad_g)
    }
}
