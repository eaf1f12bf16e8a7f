//! Symmetric-structure tridiagonal matrices and the Thomas algorithm.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// `lower[i] = A[i + 1][i]`
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// `upper[i] = A[i][i + 1]`
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

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Adds `value` at `(i, j)` with `|i - j| <= 1`.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        match (i as isize) - (j as isize) {
            0 => self.diag[i] += value,
            1 => self.lower[j] += value,
            -1 => self.upper[i] += value,
            _ => panic!("({i}, {j}) is outside the tridiagonal band"),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i as isize) - (j as isize) {
            0 => self.diag[i],
            1 => self.lower[j],
            -1 => self.upper[i],
            _ => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Tridiagonal) -> Tridiagonal {
        let zip = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + c * y).collect();
        Tridiagonal {
            lower: zip(&self.lower, &other.lower),
            diag: zip(&self.diag, &other.diag),
            upper: zip(&self.upper, &other.upper),
        }
    }

    pub fn scaled(&self, c: f64) -> Tridiagonal {
        Tridiagonal::zeros(self.dim()).add_scaled(c, self)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mul_vec(&vec![1.0; self.dim()])
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let mut acc = self.diag[j];
                if j > 0 {
                    acc += self.upper[j - 1];
                }
                if j + 1 < n {
                    acc += self.lower[j];
                }
                acc
            })
            .collect()
    }

    /// Diagonal matrix carrying the row sums of `self`.
    pub fn lumped(&self) -> Tridiagonal {
        let mut out = Tridiagonal::zeros(self.dim());
        out.diag = self.row_sums();
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(l, u)| (l - u).abs() <= tol * l.abs().max(u.abs()).max(1.0))
    }

    /// Thomas factorization without pivoting.
    pub fn factor(&self) -> Result<TridiagonalLu> {
        let n = self.dim();
        let mut c = vec![0.0; n.saturating_sub(1)];
        let mut denom = vec![0.0; n];
        for i in 0..n {
            let mut d = self.diag[i];
            if i > 0 {
                d -= self.lower[i - 1] * c[i - 1];
            }
            if d == 0.0 || !d.is_finite() {
                return Err(Error::SingularSystem { row: i });
            }
            denom[i] = d;
            if i + 1 < n {
                c[i] = self.upper[i] / d;
            }
        }
        Ok(TridiagonalLu {
            lower: self.lower.clone(),
            c,
            denom,
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.factor()?.solve(rhs))
    }
}

/// Factorized form produced by [`Tridiagonal::factor`].
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    c: Vec<f64>,
    denom: Vec<f64>,
}

impl TridiagonalLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.denom.len();
        let mut x = vec![0.0; n];
        for i in 0..n {
            let mut v = rhs[i];
            if i > 0 {
                v -= self.lower[i - 1] * x[i - 1];
            }
            x[i] = v / self.denom[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.c[i] * x[i + 1];
        }
        x
    }
}
