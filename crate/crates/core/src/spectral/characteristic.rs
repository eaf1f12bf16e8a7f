use crate::model::ModelParams;

/// `(cos(w x), sin(w x) / w)` as entire functions of `w2 = w^2`; hyperbolic for `w2 < 0`.
pub(crate) fn cos_sinc(w2: f64, x: f64) -> (f64, f64) {
    let z = w2 * x * x;
    if z.abs() < 1e-3 {
        let c = 1.0 - z / 2.0 * (1.0 - z / 12.0 * (1.0 - z / 30.0 * (1.0 - z / 56.0)));
        let s = x * (1.0 - z / 6.0 * (1.0 - z / 20.0 * (1.0 - z / 42.0 * (1.0 - z / 72.0))));
        (c, s)
    } else if w2 > 0.0 {
        let w = w2.sqrt();
        ((w * x).cos(), (w * x).sin() / w)
    } else {
        let k = (-w2).sqrt();
        ((k * x).cosh(), (k * x).sinh() / k)
    }
}

/// `cos_sinc(w2, eps)` divided by `cosh(kappa eps)` on the hyperbolic branch, together
/// with the (positive) factor that was divided out. Keeps small-`mu` scans finite.
pub(crate) fn window_pair_scaled(w2: f64, eps: f64) -> (f64, f64, f64) {
    if w2 >= 0.0 {
        let (c, s) = cos_sinc(w2, eps);
        return (c, s, 1.0);
    }
    let k = (-w2).sqrt();
    let ke = k * eps;
    if ke < 20.0 {
        let (c, s) = cos_sinc(w2, eps);
        let ch = ke.cosh();
        (c / ch, s / ch, ch)
    } else {
        (1.0, ke.tanh() / k, f64::INFINITY)
    }
}

pub(crate) fn squared_frequencies(lambda: f64, mu: f64, s0: f64) -> (f64, f64) {
    ((lambda - s0) / mu, lambda / mu)
}

/// Pole-free characteristic function
/// `G(L) = w0 sin(w0 eps) cos(w1 (1 - eps)) + w1 cos(w0 eps) sin(w1 (1 - eps))`
/// with `w0^2 = (L - s0) / mu`, `w1^2 = L / mu`. Its zeros are the Neumann
/// eigenvalues; `G(L) = -V'(1; L)` for the solution with `V(0) = 1`, `V'(0) = 0`.
pub fn characteristic_value(lambda: f64, params: &ModelParams) -> f64 {
    let (w0, w1) = squared_frequencies(lambda, params.mu, params.s0);
    let (c0, s0) = cos_sinc(w0, params.eps);
    let (c1, s1) = cos_sinc(w1, 1.0 - params.eps);
    w0 * s0 * c1 + w1 * c0 * s1
}

/// `G(L)` divided by a positive factor that avoids overflow; same sign and zeros.
pub(crate) fn characteristic_scaled(lambda: f64, mu: f64, eps: f64, s0: f64) -> f64 {
    let (w0, w1) = squared_frequencies(lambda, mu, s0);
    let (c0, sn0, _) = window_pair_scaled(w0, eps);
    let (c1, s1) = cos_sinc(w1, 1.0 - eps);
    w0 * sn0 * c1 + w1 * c0 * s1
}
