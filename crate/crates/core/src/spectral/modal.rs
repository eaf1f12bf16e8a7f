use std::f64::consts::PI;

use super::exact::EigenPair;
use crate::error::{invalid, Error, Result};
use crate::field::{inner_product, realize_initial, Field, Grid};
use crate::model::InitialData;

/// Below this `|b - Lambda_k|` a mode's output is integrated as `alpha_k s_k t`.
pub const DEGENERATE_RATE: f64 = 1e-10;

/// Modal data of a pre-threshold solution `n = sum_k alpha_k e^{(b - Lambda_k) t} V_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalCoefficients {
    pub b: f64,
    pub mu: f64,
    /// `alpha_k(0) = <n_I, V_k>`
    pub alpha: Vec<f64>,
    /// `s_k = <V_k, s>`
    pub s: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `Lambda0_k = b - Lambda_k`
    pub growth: Vec<f64>,
    /// `|n_I|`; infinite for point masses.
    pub initial_norm: f64,
}

impl ModalCoefficients {
    /// Projects `initial` on the eigenvectors. Constants and point masses use the
    /// closed forms `c s_k / Lambda_k` and `V_k(z)`; sampled data use the grid inner product.
    pub fn new(initial: &InitialData, pairs: &[EigenPair], b: f64, grid: Grid) -> Result<Self> {
        if pairs.is_empty() {
            return Err(invalid("K", "need at least one eigenpair"));
        }
        initial.validate()?;
        let (alpha, initial_norm) = match *initial {
            InitialData::Constant(c) => {
                let alpha = pairs
                    .iter()
                    .map(|p| match p.integral() {
                        Some(i) => c * i,
                        None => c * p.vector.mass(),
                    })
                    .collect();
                (alpha, c.abs())
            }
            InitialData::Dirac(z) => (pairs.iter().map(|p| p.value_at(z)).collect(), f64::INFINITY),
            _ => {
                let field = realize_initial(initial, grid)?;
                let alpha = pairs
                    .iter()
                    .map(|p| inner_product(&field, &p.vector))
                    .collect::<Result<Vec<_>>>()?;
                (alpha, field.norm())
            }
        };
        Ok(Self::from_parts(alpha, pairs, b, initial_norm))
    }

    pub fn from_parts(alpha: Vec<f64>, pairs: &[EigenPair], b: f64, initial_norm: f64) -> Self {
        let lambda: Vec<f64> = pairs.iter().map(|p| p.lambda).collect();
        Self {
            b,
            mu: pairs[0].shape.mu,
            alpha,
            s: pairs.iter().map(|p| p.selection_overlap()).collect(),
            growth: lambda.iter().map(|l| b - l).collect(),
            lambda,
            initial_norm,
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `phi_k = alpha_k s_k / Lambda0_k`, absent for a degenerate mode.
    pub fn phi(&self, k: usize) -> Option<f64> {
        let g = self.growth[k];
        (g.abs() >= DEGENERATE_RATE).then(|| self.alpha[k] * self.s[k] / g)
    }

    /// Lower bound on the first dropped eigenvalue, `mu (K pi)^2`.
    pub fn truncation_eigenvalue(&self) -> f64 {
        self.mu * (self.len() as f64 * PI).powi(2)
    }
}

/// Truncated modal sum and the bound `|n_I| e^{(b - Lambda_K) t}` on the dropped tail.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalSnapshot {
    pub field: Field,
    pub remainder_bound: f64,
}

pub fn modal_solution(coeffs: &ModalCoefficients, pairs: &[EigenPair], t: f64) -> ModalSnapshot {
    let grid = pairs[0].vector.grid();
    let mut values = vec![0.0; grid.n_nodes()];
    for (k, pair) in pairs.iter().enumerate().take(coeffs.len()) {
        let a = coeffs.alpha[k] * (coeffs.growth[k] * t).exp();
        for (v, e) in values.iter_mut().zip(pair.vector.values()) {
            *v += a * e;
        }
    }
    let remainder_bound = if coeffs.initial_norm.is_finite() {
        coeffs.initial_norm * ((coeffs.b - coeffs.truncation_eigenvalue()) * t).exp()
    } else {
        f64::INFINITY
    };
    ModalSnapshot {
        field: Field::from_vec_unchecked(grid, values),
        remainder_bound,
    }
}

/// `(e^{a t} - 1) / a`, continuous through `a = 0`.
fn growth_integral(a: f64, t: f64) -> f64 {
    if a.abs() < DEGENERATE_RATE {
        t * (1.0 + 0.5 * a * t)
    } else {
        (a * t).exp_m1() / a
    }
}

/// `rho(t) = sum_k phi_k (e^{Lambda0_k t} - 1)`, summed in ascending `k`.
pub fn rho_spectral(coeffs: &ModalCoefficients, t: f64) -> f64 {
    (0..coeffs.len())
        .map(|k| coeffs.alpha[k] * coeffs.s[k] * growth_integral(coeffs.growth[k], t))
        .sum()
}

/// `d rho / dt = int s n`.
pub fn rho_rate_spectral(coeffs: &ModalCoefficients, t: f64) -> f64 {
    (0..coeffs.len())
        .map(|k| coeffs.alpha[k] * coeffs.s[k] * (coeffs.growth[k] * t).exp())
        .sum()
}

/// First time `rho_spectral` reaches `rho0` (bisection, then Newton polish to
/// `|rho - rho0| <= 1e-12 rho0`).
pub fn time_to_threshold_spectral(coeffs: &ModalCoefficients, rho0: f64) -> Result<f64> {
    if !(rho0 > 0.0) {
        return Err(invalid("rho0", "threshold must be positive"));
    }
    let weight = |k: usize| coeffs.alpha[k] * coeffs.s[k];
    let dominant = (0..coeffs.len())
        .filter(|&k| weight(k) != 0.0 && coeffs.growth[k] > -DEGENERATE_RATE)
        .max_by(|&i, &j| coeffs.growth[i].total_cmp(&coeffs.growth[j]));
    match dominant {
        Some(k) if weight(k) < 0.0 => {
            return Err(Error::ThresholdUnreachable {
                rho0,
                horizon: f64::INFINITY,
            })
        }
        Some(_) => {}
        None => {
            let limit: f64 = (0..coeffs.len())
                .map(|k| -weight(k) / coeffs.growth[k])
                .sum();
            if limit <= rho0 {
                return Err(Error::ThresholdUnreachable {
                    rho0,
                    horizon: f64::INFINITY,
                });
            }
        }
    }
    let f = |t: f64| rho_spectral(coeffs, t) - rho0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::ThresholdUnreachable { rho0, horizon: hi });
        }
    }
    // Bisection to a tight bracket, then Newton inside it.
    for _ in 0..60 {
        if hi - lo <= 1e-6 * hi {
            break;
        }
        let m = 0.5 * (lo + hi);
        if f(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    let tol = 1e-12 * rho0;
    let mut t = 0.5 * (lo + hi);
    for _ in 0..50 {
        let r = f(t);
        if r.abs() <= tol {
            return Ok(t);
        }
        if r < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let slope = rho_rate_spectral(coeffs, t);
        let next = t - r / slope;
        t = if slope > 0.0 && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(t);
        }
    }
    Ok(t)
}
