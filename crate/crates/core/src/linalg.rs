//! Small dense/tridiagonal helpers.

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals; `lower[i]` couples row `i + 1`
/// to column `i`, `upper[i]` couples row `i` to column `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// LU factorization without pivoting (Thomas algorithm).
    pub fn factorize(&self) -> Result<TridiagonalLu> {
        let n = self.len();
        let mut pivots = vec![0.0; n];
        let mut mult = vec![0.0; n.saturating_sub(1)];
        let scale = self
            .diag
            .iter()
            .chain(&self.lower)
            .chain(&self.upper)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * 1e-300_f64.max(f64::EPSILON * 1e-6);
        pivots[0] = self.diag[0];
        for i in 1..n {
            if pivots[i - 1].abs() <= tiny {
                return Err(Error::Singular(format!("zero pivot at row {}", i - 1)));
            }
            mult[i - 1] = self.lower[i - 1] / pivots[i - 1];
            pivots[i] = self.diag[i] - mult[i - 1] * self.upper[i - 1];
        }
        if n > 0 && pivots[n - 1].abs() <= tiny {
            return Err(Error::Singular(format!("zero pivot at row {}", n - 1)));
        }
        Ok(TridiagonalLu {
            pivots,
            mult,
            upper: self.upper.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    pivots: Vec<f64>,
    mult: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagonalLu {
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.pivots.len();
        for i in 1..n {
            rhs[i] -= self.mult[i - 1] * rhs[i - 1];
        }
        rhs[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.upper[i] * rhs[i + 1]) / self.pivots[i];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
}

/// Trapezoidal weights on a uniform grid of `n` nodes and spacing `h`.
pub(crate) fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}
