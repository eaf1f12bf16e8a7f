use std::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Result};
use crate::field::{Field, Grid};
use crate::model::{ModelParams, SelectionProfile};

/// Two-term expansion `lambda0 + eps * lambda1` of the eigenvalue for a narrow window,
/// with the leading eigenvector `v0` and its first corrector `v1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticEigen {
    pub k: usize,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda_eps: f64,
    pub v0: Field,
    pub v1: Field,
}

/// Homogeneous Neumann mode: `1` for `k = 0`, `sqrt(2) cos(k pi x)` otherwise.
pub fn v0_value(k: usize, x: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        SQRT_2 * (k as f64 * PI * x).cos()
    }
}

fn v0_derivative(k: usize, x: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        let kp = k as f64 * PI;
        -SQRT_2 * kp * (kp * x).sin()
    }
}

/// First corrector, made orthogonal to `v0`:
/// `-(sbar/mu) x^2/2 + sbar/(6 mu)` for `k = 0`, and
/// `-(sbar/mu) [(1 - x) v0'/(k pi)^2 + x v0] + c v0` with
/// `c = (sbar/mu) (1/2 - 1/(2 (k pi)^2))` for `k >= 1`.
pub fn v1_value(k: usize, x: f64, mu: f64, sbar: f64) -> f64 {
    let a = sbar / mu;
    if k == 0 {
        -a * x * x / 2.0 + a / 6.0
    } else {
        let kp2 = (k as f64 * PI).powi(2);
        let w = (1.0 - x) * v0_derivative(k, x) / kp2 + x * v0_value(k, x);
        let c = a * (0.5 - 0.5 / kp2);
        -a * w + c * v0_value(k, x)
    }
}

/// Asymptotic eigenpairs for `k < count`. The fast selection profile is `s0` on
/// `[0, 1]`, so `sbar = s0`.
pub fn eigs_asymptotic(params: &ModelParams, count: usize, grid: Grid) -> Result<Vec<AsymptoticEigen>> {
    params.validate()?;
    if count == 0 {
        return Err(invalid("K", "need at least one mode"));
    }
    let sbar = params.s0;
    Ok((0..count)
        .map(|k| {
            let lambda0 = params.mu * (k as f64 * PI).powi(2);
            // sbar v0(0)^2 / |v0|^2
            let lambda1 = sbar * v0_value(k, 0.0).powi(2);
            AsymptoticEigen {
                k,
                lambda0,
                lambda1,
                lambda_eps: lambda0 + params.eps * lambda1,
                v0: Field::from_fn(grid, |x| v0_value(k, x)),
                v1: Field::from_fn(grid, |x| v1_value(k, x, params.mu, sbar)),
            }
        })
        .collect())
}

fn check_fast(y: f64) -> Result<()> {
    if !(y >= 0.0) {
        return Err(invalid("y", format!("{y} is negative")));
    }
    Ok(())
}

/// Boundary-layer corrector `pi2(y) = (1/mu) int_0^y int_0^z s(w) dw dz`
/// (additive constant dropped) for a piecewise-constant fast profile.
pub fn corrector_pi2(y: f64, s_fast: &SelectionProfile, mu: f64) -> Result<f64> {
    check_fast(y)?;
    let total: f64 = s_fast
        .pieces()
        .map(|(a, b, v)| {
            let a = a.max(0.0);
            if b <= a || y <= a {
                0.0
            } else if y <= b {
                v * (y - a).powi(2) / 2.0
            } else {
                v * ((b - a).powi(2) / 2.0 + (b - a) * (y - b))
            }
        })
        .sum();
    Ok(total / mu)
}

/// `d pi2 / dy = (1/mu) int_0^y s`.
pub fn corrector_pi2_derivative(y: f64, s_fast: &SelectionProfile, mu: f64) -> Result<f64> {
    check_fast(y)?;
    Ok(s_fast.integral_over(0.0, y) / mu)
}
