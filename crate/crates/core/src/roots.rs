//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket until the bracket is narrower than `xtol`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotFound(format!(
            "no sign change on [{a}, {b}] ({fa:e}, {fb:e})"
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= xtol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Illinois-modified regula falsi: superlinear on smooth monotone functions, never
/// leaves the bracket. Stops when `|f| <= ftol` or the bracket is below `xtol`.
pub fn illinois(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    ftol: f64,
) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.abs() <= ftol {
        return Ok(a);
    }
    if fb.abs() <= ftol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotFound(format!(
            "no sign change on [{a}, {b}] ({fa:e}, {fb:e})"
        )));
    }
    let mut side = 0;
    for _ in 0..200 {
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx.abs() <= ftol || (b - a).abs() <= xtol {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::RootNotFound(format!(
        "no convergence on [{a}, {b}] after 200 iterations"
    )))
}

/// Grows `hi` geometrically from `start` until `f(hi) >= 0`, returning the bracket
/// `(lo, hi)` with `f(lo) < 0`.
pub fn expand_upward(
    mut f: impl FnMut(f64) -> f64,
    start: f64,
    cap: f64,
) -> Result<(f64, f64)> {
    let mut lo = 0.0;
    let mut hi = start;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            return Err(Error::RootNotFound(format!(
                "no upper bracket below {cap}"
            )));
        }
    }
    Ok((lo, hi))
}
