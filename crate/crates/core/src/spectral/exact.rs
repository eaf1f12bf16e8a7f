use std::f64::consts::PI;

use super::characteristic::{characteristic_scaled, cos_sinc, squared_frequencies, window_pair_scaled};
use crate::error::{invalid, Error, Result};
use crate::field::{Field, Grid};
use crate::model::ModelParams;
use crate::roots;

/// Closed-form eigenfunction of the two-piece operator with `V(0) = 1` up to the
/// positive factor removed on the hyperbolic branch:
/// `V = cos(w0 x)` on `[0, eps]`, continued as the `C^1` solution with frequency `w1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenShape {
    pub mu: f64,
    pub eps: f64,
    pub s0: f64,
    pub lambda: f64,
    w0sq: f64,
    w1sq: f64,
    v_eps: f64,
    dv_eps: f64,
    sinc_eps: f64,
}

impl EigenShape {
    pub fn new(lambda: f64, mu: f64, eps: f64, s0: f64) -> Self {
        let (w0sq, w1sq) = squared_frequencies(lambda, mu, s0);
        let (v_eps, sinc_eps, _) = window_pair_scaled(w0sq, eps);
        Self {
            mu,
            eps,
            s0,
            lambda,
            w0sq,
            w1sq,
            v_eps,
            dv_eps: -w0sq * sinc_eps,
            sinc_eps,
        }
    }

    /// Un-normalized value at `x` in `[0, 1]`.
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.eps {
            if self.w0sq >= 0.0 {
                cos_sinc(self.w0sq, x).0
            } else {
                // cosh(k x) / cosh(k eps) without overflow.
                let k = (-self.w0sq).sqrt();
                (k * (x - self.eps)).exp() * (1.0 + (-2.0 * k * x).exp())
                    / (1.0 + (-2.0 * k * self.eps).exp())
            }
        } else {
            let (c, s) = cos_sinc(self.w1sq, x - self.eps);
            self.v_eps * c + self.dv_eps * s
        }
    }

    /// Un-normalized `int_0^eps V dx`; multiplied by `s0` this is the selection overlap.
    pub fn window_integral(&self) -> f64 {
        self.sinc_eps
    }
}

/// Eigenvalue `lambda` of mode `k` (the number of interior zeros) with its
/// L2-normalized eigenvector (`vector(0) > 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub k: usize,
    pub lambda: f64,
    pub vector: Field,
    pub shape: EigenShape,
    /// Factor turning `shape` values into the normalized eigenvector.
    pub scale: f64,
}

impl EigenPair {
    /// Normalized eigenfunction at any `x` in `[0, 1]`.
    pub fn value_at(&self, x: f64) -> f64 {
        self.scale * self.shape.value(x)
    }

    /// `s_k = <V_k, s>` in closed form.
    pub fn selection_overlap(&self) -> f64 {
        self.scale * self.shape.s0 * self.shape.window_integral()
    }

    /// `int V_k dx = s_k / Lambda_k` (integrate the eigen-equation; Neumann ends).
    pub fn integral(&self) -> Option<f64> {
        (self.lambda > 0.0).then(|| self.selection_overlap() / self.lambda)
    }
}

fn sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

fn scan_roots(mu: f64, eps: f64, s0: f64, count: usize, step: f64) -> Vec<f64> {
    let g = |l: f64| characteristic_scaled(l, mu, eps, s0);
    // Eigenvalues are bounded by those of the window-everywhere operator.
    let upper = mu * (count as f64 * PI).powi(2) + s0 + 4.0 * step;
    let mut roots_found = Vec::with_capacity(count);
    let mut lo = 0.0;
    let mut g_lo = g(lo);
    while roots_found.len() < count && lo < upper {
        let hi = lo + step;
        let g_hi = g(hi);
        if g_hi == 0.0 {
            roots_found.push(hi);
            lo = hi + 1e-9 * step;
            g_lo = g(lo);
            continue;
        }
        if g_lo != 0.0 && g_lo.signum() != g_hi.signum() {
            let tol = 1e-12 * hi.max(1.0);
            if let Ok(r) = roots::bisect(g, lo, hi, tol) {
                roots_found.push(r);
            }
        }
        lo = hi;
        g_lo = g_hi;
    }
    roots_found
}

/// First `count` eigenpairs, vectors sampled on `grid`.
pub fn eigs_exact(params: &ModelParams, count: usize, grid: Grid) -> Result<Vec<EigenPair>> {
    params.validate()?;
    if count == 0 {
        return Err(invalid("K", "need at least one mode"));
    }
    let (mu, eps, s0) = (params.mu, params.eps, params.s0);
    let lambdas: Vec<f64> = if s0 == 0.0 {
        (0..count).map(|k| mu * (k as f64 * PI).powi(2)).collect()
    } else {
        let mut step = (mu * PI * PI / 8.0).min(s0 / 8.0);
        let mut attempt = 0;
        loop {
            let found = scan_roots(mu, eps, s0, count, step);
            let problem = if found.len() < count {
                Some(format!(
                    "found {} of {count} roots with scan step {step:e}",
                    found.len()
                ))
            } else {
                mode_count_mismatch(&found, mu, eps, s0)
            };
            match problem {
                None => break found,
                Some(detail) if attempt >= 2 => return Err(Error::MissedMode { detail }),
                Some(_) => {
                    attempt += 1;
                    step *= 0.5;
                }
            }
        }
    };
    let nodes = grid.nodes();
    Ok(lambdas
        .into_iter()
        .enumerate()
        .map(|(k, lambda)| {
            let shape = EigenShape::new(lambda, mu, eps, s0);
            let raw = Field::from_fn(grid, |x| shape.value(x));
            let scale = 1.0 / raw.norm();
            let vector =
                Field::from_vec_unchecked(grid, nodes.iter().map(|&x| scale * shape.value(x)).collect());
            EigenPair {
                k,
                lambda,
                vector,
                shape,
                scale,
            }
        })
        .collect())
}

fn mode_count_mismatch(lambdas: &[f64], mu: f64, eps: f64, s0: f64) -> Option<String> {
    let samples = (50 * lambdas.len()).max(4000);
    for (k, &lambda) in lambdas.iter().enumerate() {
        let shape = EigenShape::new(lambda, mu, eps, s0);
        let zeros = sign_changes((0..=samples).map(|i| shape.value(i as f64 / samples as f64)));
        if zeros != k {
            return Some(format!(
                "root {k} at Lambda = {lambda:.12e} has {zeros} sign changes"
            ));
        }
    }
    None
}
