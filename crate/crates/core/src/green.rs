//! Heat kernels and two-sided time-to-threshold bounds for a point-mass initial
//! population at `z` outside the selection window.
//!
//! By the comparison principle the solution from `delta_z` lies between the free
//! (or reflected) heat kernels with growth rates `b - s_inf` and `b`. The bounds
//! below integrate those kernels over the window and invert the resulting
//! lower/upper estimates of `rho(t)`.
//!
//! Several constants differ from a naive transcription of the closed forms; each
//! one follows from redoing the integral estimate it comes from:
//! - the whole-line `j2` inversion carries the `1/eps` of the `2 eps` window
//!   prefactor, and its switching time is `t0 = (z + eps) / (2 sqrt((b - s_inf) mu))`;
//! - the first-branch estimate is `j1(t) = eps D / (4 e mu sqrt(pi)) e^{-D^2/(2 mu t)}`
//!   with `D = z + eps` on the line and `eps z / (8 e mu sqrt(pi)) e^{-z^2/(2 mu t)}`
//!   on the interval, and `j1^{-1}` is its exact inverse;
//! - the interval's alternate upper bound carries `2 sqrt(pi mu) / eps` and
//!   `t0 = z / (2 sqrt(mu (b - s_inf)))`.

use std::f64::consts::{E, PI};

use crate::error::{invalid, Error, Result};
use crate::model::{DomainSpec, ModelParams};
use crate::quadrature::{integrate, QuadConfig};
use crate::roots;

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(invalid("t", format!("{t} must be positive")));
    }
    Ok(())
}

/// Whole-line kernel `e^{b t - (x - z)^2 / (4 mu t)} / sqrt(4 pi mu t)`.
pub fn kernel_free(t: f64, x: f64, z: f64, mu: f64, b: f64) -> Result<f64> {
    check_time(t)?;
    Ok((b * t - (x - z).powi(2) / (4.0 * mu * t)).exp() / (4.0 * PI * mu * t).sqrt())
}

/// Tail bound for all image pairs with `|n| >= n_min` (both image families).
fn image_tail_bound(n_min: usize, mu_t: f64) -> f64 {
    if n_min == 0 {
        return f64::INFINITY;
    }
    let m = (n_min - 1) as f64;
    let ratio = (-(2.0 * m + 1.0) / mu_t).exp();
    4.0 * (-m * m / mu_t).exp() / (1.0 - ratio)
}

/// Reflected (Neumann) kernel on `[0, 1]` by the method of images. With
/// `n_images = None` the sum is truncated once the Gaussian tail bound drops below
/// `1e-14` of the retained sum; terms are added in ascending `|n|`.
pub fn kernel_bounded(
    t: f64,
    x: f64,
    z: f64,
    mu: f64,
    b: f64,
    n_images: Option<usize>,
) -> Result<f64> {
    check_time(t)?;
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&z) {
        return Err(invalid("x", "points must lie in [0, 1]"));
    }
    let four_mu_t = 4.0 * mu * t;
    let g = |y: f64| (-y * y / four_mu_t).exp();
    let pair = |n: i64| {
        let n2 = 2.0 * n as f64;
        g(x - n2 + z) + g(x - n2 - z)
    };
    let mut sum = pair(0);
    let mut m = 1usize;
    loop {
        match n_images {
            Some(limit) if m > limit => break,
            None if image_tail_bound(m, mu * t) <= 1e-14 * sum => break,
            _ => {}
        }
        sum += pair(m as i64) + pair(-(m as i64));
        m += 1;
        if m > 1_000_000 {
            break;
        }
    }
    Ok((b * t).exp() * sum / four_mu_t.mul_add(PI, 0.0).sqrt())
}

/// `int_a^b` of the unit Gaussian `e^{-(x - c)^2 / (4 mu t)} / sqrt(4 pi mu t)`,
/// written with `erfc` on the far side to avoid cancellation.
fn gaussian_interval(a: f64, b: f64, c: f64, sigma: f64) -> f64 {
    let (u, v) = ((a - c) / sigma, (b - c) / sigma);
    if u >= 0.0 {
        0.5 * (erfc(u) - erfc(v))
    } else if v <= 0.0 {
        0.5 * (erfc(-v) - erfc(-u))
    } else {
        0.5 * (erf(v) - erf(u))
    }
}

/// Point-mass problem: founder trait `z`, model coefficients and the trait space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracSetup {
    pub z: f64,
    pub params: ModelParams,
    pub domain: DomainSpec,
    pub s_inf: f64,
}

impl DiracSetup {
    /// On the whole line a founder at `z < -eps` is reflected to `|z|`.
    pub fn new(z: f64, params: ModelParams, domain: DomainSpec) -> Result<Self> {
        params.validate()?;
        let z = match domain {
            DomainSpec::WholeLine => z.abs(),
            DomainSpec::BoundedUnit => z,
        };
        if !(z > params.eps) {
            return Err(invalid("dirac_z", format!("{z} must exceed eps = {}", params.eps)));
        }
        if domain == DomainSpec::BoundedUnit && !(z < 1.0) {
            return Err(invalid("dirac_z", format!("{z} must lie in (eps, 1)")));
        }
        Ok(Self {
            z,
            params,
            domain,
            s_inf: params.s0,
        })
    }

    fn window(&self) -> (f64, f64) {
        match self.domain {
            DomainSpec::BoundedUnit => (0.0, self.params.eps),
            DomainSpec::WholeLine => (-self.params.eps, self.params.eps),
        }
    }

    /// Window mass of the rate-free kernel from `z` at time `t`.
    fn window_mass(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let sigma = (4.0 * self.params.mu * t).sqrt();
        let (a, b) = self.window();
        match self.domain {
            DomainSpec::WholeLine => gaussian_interval(a, b, self.z, sigma),
            DomainSpec::BoundedUnit => {
                let z = self.z;
                let mut sum = gaussian_interval(a, b, z, sigma) + gaussian_interval(a, b, -z, sigma);
                let mut m = 1i64;
                loop {
                    let mut add = 0.0;
                    for n in [m, -m] {
                        let shift = 2.0 * n as f64;
                        add += gaussian_interval(a, b, shift + z, sigma)
                            + gaussian_interval(a, b, shift - z, sigma);
                    }
                    sum += add;
                    // Remaining centres are at distance >= 2m from the window.
                    if (2.0 * m as f64 - 1.0) / sigma > 6.5 && add <= 1e-16 * sum {
                        break;
                    }
                    m += 1;
                }
                sum
            }
        }
    }
}

/// Bracket `[lower, upper]` on the selected output of the point-mass problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoInterval {
    pub lower: f64,
    pub upper: f64,
}

/// Integrates `s` times the comparison kernels with rates `b - s_inf` and `b` over
/// the window and over `[0, t]`.
pub fn rho_dirac(setup: &DiracSetup, t: f64, cfg: QuadConfig) -> Result<RhoInterval> {
    if !(t >= 0.0) {
        return Err(invalid("t", "time must be nonnegative"));
    }
    if t == 0.0 {
        return Ok(RhoInterval {
            lower: 0.0,
            upper: 0.0,
        });
    }
    let b = setup.params.b();
    let s = setup.s_inf;
    let piece = |rate: f64, what: &str| -> Result<f64> {
        let f = |u: f64| (rate * u).exp() * setup.window_mass(u);
        Ok(s * integrate(what, f, 0.0, t, cfg)?.value)
    };
    Ok(RhoInterval {
        lower: piece(b - s, "lower output integral")?,
        upper: piece(b, "upper output integral")?,
    })
}

/// `J_a(t) >= e^{-2/t} / (2 e)`, zero at `t = 0`.
pub fn j_lower_bound(_a: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-2.0 / t).exp() / (2.0 * E)
    }
}

/// Upper bound on the reflected kernel for `x` in the window and `z` beyond it:
/// `e^{b t - (z - eps)^2/(4 mu t)} (4 / sqrt(4 pi mu t) + 2 / sqrt(2 (1 - eps)))`.
pub fn kernel_bound_upper(t: f64, x: f64, z: f64, mu: f64, b: f64, eps: f64) -> Result<f64> {
    check_time(t)?;
    if !(x > 0.0 && x < eps) {
        return Err(invalid("x", format!("{x} must lie in (0, eps)")));
    }
    if !(z > eps && z < 1.0) {
        return Err(invalid("z", format!("{z} must lie in (eps, 1)")));
    }
    let g = (b * t - (z - eps).powi(2) / (4.0 * mu * t)).exp();
    Ok(g * (4.0 / (4.0 * PI * mu * t).sqrt() + 2.0 / (2.0 * (1.0 - eps)).sqrt()))
}

/// Lower bound on the reflected kernel:
/// `e^{b t - (x + z)^2/(4 mu t)} (1 / sqrt(4 pi mu t) + erfc(sqrt(3/(mu t))) / (4 sqrt 3))`.
pub fn kernel_bound_lower(t: f64, x: f64, z: f64, mu: f64, b: f64) -> Result<f64> {
    check_time(t)?;
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&z) {
        return Err(invalid("x", "points must lie in [0, 1]"));
    }
    let g = (b * t - (x + z).powi(2) / (4.0 * mu * t)).exp();
    Ok(g * (1.0 / (4.0 * PI * mu * t).sqrt() + erfc((3.0 / (mu * t)).sqrt()) / (4.0 * 3f64.sqrt())))
}

/// Which estimate produced the upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperBranch {
    /// The threshold is met while the early-time estimate `j1` still applies.
    EarlyTime,
    /// Taylor-order `k` inversion of the late-time estimate.
    Taylor { k: usize },
    /// The `erfc` estimate on the interval.
    Erfc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub t_l: f64,
    /// Final upper bound (on the interval the smaller of the two estimates).
    pub t_u: Option<f64>,
    /// Alternate interval upper bound, sharper for small `mu`.
    pub t_u_inf: Option<f64>,
    pub branch: Option<UpperBranch>,
}

/// Largest Taylor order tried in the `j2` inversions.
pub const MAX_TAYLOR_ORDER: usize = 8;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `min_k ((k + 1/2) k! pref / r^k e^{r t0} (rho0 - j1_t0) + t0^{k + 1/2})^{1/(k + 1/2)}`.
fn taylor_inverse(pref: f64, r: f64, t0: f64, excess: f64) -> (f64, usize) {
    (0..=MAX_TAYLOR_ORDER)
        .map(|k| {
            let p = k as f64 + 0.5;
            let inner = p * factorial(k) * pref / r.powi(k as i32) * (r * t0).exp() * excess
                + t0.powf(p);
            (inner.powf(1.0 / p), k)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap()
}

/// Solves `c e^{-D^2/(2 mu t)} = rho0` for `t`.
fn early_time_inverse(c: f64, d: f64, mu: f64, rho0: f64) -> f64 {
    d * d / (2.0 * mu * (c / rho0).ln())
}

fn lower_time(lnw: f64, gap: f64, mu: f64, b: f64, inner_factor: f64) -> f64 {
    (lnw + (lnw * lnw + gap * gap * inner_factor / mu).sqrt()) / (2.0 * (b + 1.0))
}

fn require_domain(setup: &DiracSetup, want: DomainSpec) -> Result<()> {
    if setup.domain != want {
        return Err(invalid("domain", format!("expected {want:?}, got {:?}", setup.domain)));
    }
    Ok(())
}

/// Bounds on the whole line (window `[-eps, eps]`).
pub fn bounds_free(setup: &DiracSetup, rho0: f64) -> Result<BoundPair> {
    require_domain(setup, DomainSpec::WholeLine)?;
    let p = &setup.params;
    let (b, mu, eps, z) = (p.b(), p.mu, p.eps, setup.z);
    let lnw = ((PI * mu).sqrt() * rho0 / (2.0 * eps)).ln();
    let t_l = lower_time(lnw, z - eps, mu, b, b + 1.0);
    let r = b - setup.s_inf;
    let (t_u, branch) = if r > 0.0 {
        let d = z + eps;
        let c1 = eps * d / (4.0 * E * mu * PI.sqrt());
        let t0 = d / (2.0 * (r * mu).sqrt());
        let j1_t0 = c1 * (-d * d / (2.0 * mu * t0)).exp();
        if rho0 < j1_t0 {
            (Some(early_time_inverse(c1, d, mu, rho0)), Some(UpperBranch::EarlyTime))
        } else {
            let (t, k) = taylor_inverse((PI * mu).sqrt() / eps, r, t0, rho0 - j1_t0);
            (Some(t), Some(UpperBranch::Taylor { k }))
        }
    } else {
        (None, None)
    };
    Ok(BoundPair {
        t_l,
        t_u,
        t_u_inf: None,
        branch,
    })
}

/// Bounds on `[0, 1]` with the window `[0, eps]`.
pub fn bounds_bounded(setup: &DiracSetup, rho0: f64) -> Result<BoundPair> {
    require_domain(setup, DomainSpec::BoundedUnit)?;
    let p = &setup.params;
    let (b, mu, eps, z) = (p.b(), p.mu, p.eps, setup.z);
    let omega = 2.0 * rho0 * ((1.0 - eps) * mu * PI).sqrt()
        / (eps * ((1.0 - eps).sqrt() + (2.0 * mu).sqrt()));
    let t_l = lower_time(omega.ln(), z - eps, mu, b, 1.0);
    let r = b - setup.s_inf;
    if r <= 0.0 {
        return Ok(BoundPair {
            t_l,
            t_u: None,
            t_u_inf: None,
            branch: None,
        });
    }
    let c1 = eps * z / (8.0 * E * mu * PI.sqrt());
    let t0 = z / (2.0 * (mu * r).sqrt());
    let j1_t0 = c1 * (-z * z / (2.0 * mu * t0)).exp();
    if rho0 < j1_t0 {
        let t = early_time_inverse(c1, z, mu, rho0);
        return Ok(BoundPair {
            t_l,
            t_u: Some(t),
            t_u_inf: Some(t),
            branch: Some(UpperBranch::EarlyTime),
        });
    }
    let excess = rho0 - j1_t0;
    let t_erfc = t0
        + (4.0 * 3f64.sqrt() * r * excess / (eps * erfc((3.0 / (mu * t0)).sqrt()))).ln_1p() / r;
    let (t_inf, k) = taylor_inverse(2.0 * (PI * mu).sqrt() / eps, r, t0, excess);
    let (t_u, branch) = if t_inf < t_erfc {
        (t_inf, UpperBranch::Taylor { k })
    } else {
        (t_erfc, UpperBranch::Erfc)
    };
    Ok(BoundPair {
        t_l,
        t_u: Some(t_u),
        t_u_inf: Some(t_inf),
        branch: Some(branch),
    })
}

/// The `erfc`-branch upper bound alone (before taking the minimum with `t_u_inf`).
pub fn bounded_erfc_upper(setup: &DiracSetup, rho0: f64) -> Result<Option<f64>> {
    require_domain(setup, DomainSpec::BoundedUnit)?;
    let p = &setup.params;
    let (mu, eps, z) = (p.mu, p.eps, setup.z);
    let r = p.b() - setup.s_inf;
    if r <= 0.0 {
        return Ok(None);
    }
    let c1 = eps * z / (8.0 * E * mu * PI.sqrt());
    let t0 = z / (2.0 * (mu * r).sqrt());
    let j1_t0 = c1 * (-z * z / (2.0 * mu * t0)).exp();
    if rho0 < j1_t0 {
        return Ok(Some(early_time_inverse(c1, z, mu, rho0)));
    }
    Ok(Some(
        t0 + (4.0 * 3f64.sqrt() * r * (rho0 - j1_t0) / (eps * erfc((3.0 / (mu * t0)).sqrt())))
            .ln_1p()
            / r,
    ))
}

/// Threshold times of the whole-line integrals
/// `I_u(t) = 2 eps int_0^t G_b(u, eps, z) du` and
/// `I_l(t) = 2 eps int_0^t G_{b - s_inf}(u, -eps, z) du`, returned as `(t_Iu, t_Il)`.
pub fn free_integral_threshold_times(setup: &DiracSetup, rho0: f64) -> Result<(f64, f64)> {
    require_domain(setup, DomainSpec::WholeLine)?;
    let p = &setup.params;
    let (b, mu, eps, z) = (p.b(), p.mu, p.eps, setup.z);
    let cfg = QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    let solve = |rate: f64, x: f64, what: &str| -> Result<f64> {
        let integral = |t: f64| -> Result<f64> {
            let f = |u: f64| {
                if u <= 0.0 {
                    0.0
                } else {
                    (rate * u - (x - z).powi(2) / (4.0 * mu * u)).exp() / (4.0 * PI * mu * u).sqrt()
                }
            };
            Ok(2.0 * eps * integrate(what, f, 0.0, t, cfg)?.value)
        };
        let mut failure = None;
        let mut g = |t: f64| match integral(t) {
            Ok(v) => v - rho0,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        };
        let mut hi = 1.0;
        let mut lo = 0.0;
        while g(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::ThresholdUnreachable { rho0, horizon: hi });
            }
        }
        let t = roots::illinois(&mut g, lo, hi, 1e-13 * hi, 1e-13 * rho0)?;
        match failure {
            Some(e) => Err(e),
            None => Ok(t),
        }
    };
    Ok((solve(b, eps, "I_u")?, solve(b - setup.s_inf, -eps, "I_l")?))
}
