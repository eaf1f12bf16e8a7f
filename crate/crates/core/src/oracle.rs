//! Brute-force reference computations. None of these share code paths with the
//! production solvers they are used to check.

use crate::error::Result;
use crate::model::SelectionProfile;
use crate::quadrature::{integrate, QuadConfig};

/// Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm sequence / LDL^T inertia).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi.abs().max(lo.abs()) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Cell-centred finite-volume matrix of `-mu d^2/dx^2 + s` with Neumann ends on
/// `n_cells` cells; `s` enters as its exact cell average.
pub fn finite_volume_operator(mu: f64, s: &SelectionProfile, n_cells: usize) -> SymTridiagonal {
    let h = 1.0 / n_cells as f64;
    let k = mu / (h * h);
    let diag = (0..n_cells)
        .map(|i| {
            let neighbours = if i == 0 || i + 1 == n_cells { 1.0 } else { 2.0 };
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            neighbours * k + s.integral_over(a, b) / h
        })
        .collect();
    SymTridiagonal {
        diag,
        off: vec![-k; n_cells - 1],
    }
}

/// First `count` eigenvalues of [`finite_volume_operator`].
///
/// Bisection alone is accurate only to about `eps_mach * |A|`, which for fine grids
/// swamps the small eigenvalues. Each bisection value is therefore refined by inverse
/// iteration and a Rayleigh quotient evaluated in difference form
/// (`k sum (x_{i+1} - x_i)^2 + sum c_i x_i^2`), which has no cancellation.
pub fn finite_volume_eigenvalues(mu: f64, s: &SelectionProfile, n_cells: usize, count: usize) -> Vec<f64> {
    let op = finite_volume_operator(mu, s, n_cells);
    let k = -op.off.first().copied().unwrap_or(0.0);
    let h = 1.0 / n_cells as f64;
    let cell_s: Vec<f64> = (0..n_cells)
        .map(|i| s.integral_over(i as f64 * h, (i + 1) as f64 * h) / h)
        .collect();
    (0..count)
        .map(|j| {
            let sigma = op.eigenvalue(j);
            let mut x: Vec<f64> = (0..n_cells).map(|i| 1.0 + 1e-3 * ((i * 7919) % 101) as f64).collect();
            for _ in 0..3 {
                x = shifted_solve(&op, sigma, &x);
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v /= norm);
            }
            let grad: f64 = x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
            let pot: f64 = x.iter().zip(&cell_s).map(|(v, c)| c * v * v).sum();
            k * grad + pot
        })
        .collect()
}

/// Solves `(A - sigma I) x = rhs` by unpivoted elimination; zero pivots are nudged.
fn shifted_solve(op: &SymTridiagonal, sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let n = op.diag.len();
    let tiny = f64::EPSILON * op.gershgorin().1.abs().max(1.0);
    let mut piv = vec![0.0; n];
    let mut y = vec![0.0; n];
    for i in 0..n {
        let (l, carry) = if i == 0 {
            (0.0, 0.0)
        } else {
            let l = op.off[i - 1] / piv[i - 1];
            (l, l * y[i - 1])
        };
        piv[i] = op.diag[i] - sigma - if i == 0 { 0.0 } else { l * op.off[i - 1] };
        if piv[i].abs() < tiny {
            piv[i] = tiny;
        }
        y[i] = rhs[i] - carry;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let next = if i + 1 < n { op.off[i] * x[i + 1] } else { 0.0 };
        x[i] = (y[i] - next) / piv[i];
    }
    x
}

/// `J_a(t) = int_0^t e^{a u - 1/u} u^{-1/2} du` by adaptive quadrature.
pub fn j_integral(a: f64, t: f64) -> Result<f64> {
    let f = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            (a * u - 1.0 / u).exp() / u.sqrt()
        }
    };
    let cfg = QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    Ok(integrate("J_a", f, 0.0, t, cfg)?.value)
}

/// `erf(x)` from its Maclaurin series with `terms` terms.
pub fn erf_series(x: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    let mut term = x;
    for n in 0..terms {
        sum += term / (2 * n + 1) as f64;
        term *= -x * x / (n + 1) as f64;
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}
