//! Closed-form time-to-threshold estimates in three asymptotic regimes.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NarrowEps,
    SmallMu,
    LargeMu,
}

/// Order of the output error `|rho_out(t_est) - rho0|` in the regime's small parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorOrder {
    /// `|ln eps| sqrt(eps)`
    SqrtEpsLogEps,
    /// `mu`
    Mu,
    /// `1 / mu`
    InverseMu,
}

impl fmt::Display for ErrorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorOrder::SqrtEpsLogEps => write!(f, "O(|ln eps| sqrt(eps))"),
            ErrorOrder::Mu => write!(f, "O(mu)"),
            ErrorOrder::InverseMu => write!(f, "O(1/mu)"),
        }
    }
}

/// Whether the estimator's hypotheses hold, with the condition that was tested.
#[derive(Debug, Clone, PartialEq)]
pub struct Validity {
    pub in_regime: bool,
    pub condition: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEstimate {
    pub t_est: f64,
    pub regime: Regime,
    pub validity: Validity,
    pub error_order: ErrorOrder,
}

/// Largest `eps` treated as narrow.
pub const NARROW_EPS_MAX: f64 = 0.2;
/// Smallest `mu` treated as large (convergence is observed from `mu ~ 1`).
pub const LARGE_MU_MIN: f64 = 1.0;

fn check_mass(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(invalid(name, format!("{value} must be positive")));
    }
    Ok(())
}

/// `t = (1/b) ln(1 + rho0 b / (eps s0 n_bar))`, `n_bar = int n_I`.
pub fn t_threshold_narrow_eps(params: &ModelParams, n_mass: f64) -> Result<ThresholdEstimate> {
    params.validate()?;
    check_mass("n_mass", n_mass)?;
    let b = params.b();
    if b <= 0.0 {
        return Err(Error::NotApplicable(format!(
            "b = {b} <= 0: the leading-order output does not grow"
        )));
    }
    let t_est = (params.rho0 * b / (params.selection_integral() * n_mass)).ln_1p() / b;
    let gap = params.mu > b / (PI * PI);
    let narrow = params.eps <= NARROW_EPS_MAX;
    Ok(ThresholdEstimate {
        t_est,
        regime: Regime::NarrowEps,
        validity: Validity {
            in_regime: gap && narrow,
            condition: format!(
                "mu > b/pi^2 ({:.4e} > {:.4e}: {gap}); eps <= {NARROW_EPS_MAX} ({narrow})",
                params.mu,
                b / (PI * PI)
            ),
        },
        error_order: ErrorOrder::SqrtEpsLogEps,
    })
}

/// Leading-order variant `t = (1/b) ln(rho0 b / (n_bar s_bar eps))`; agrees with
/// [`t_threshold_narrow_eps`] as `eps -> 0`.
pub fn t_threshold_narrow_eps_leading(params: &ModelParams, n_mass: f64) -> Result<f64> {
    params.validate()?;
    check_mass("n_mass", n_mass)?;
    let b = params.b();
    if b <= 0.0 {
        return Err(Error::NotApplicable(format!("b = {b} <= 0")));
    }
    Ok((params.rho0 * b / (n_mass * params.s0 * params.eps)).ln() / b)
}

/// `t = (1/(b - s0)) ln(1 + (b - s0) rho0 / int s n_I)`, or `rho0 / int s n_I`
/// when `b = s0`.
pub fn t_threshold_small_mu(params: &ModelParams, s_overlap: f64) -> Result<ThresholdEstimate> {
    params.validate()?;
    if !(s_overlap > 0.0) {
        return Err(Error::NotApplicable(
            "no initial mass inside the selection window; use the point-mass bounds".into(),
        ));
    }
    let r = params.b() - params.s0;
    let x = r * params.rho0 / s_overlap;
    let t_est = if r.abs() < 1e-12 {
        params.rho0 / s_overlap
    } else if x <= -1.0 {
        return Err(Error::ThresholdUnreachable {
            rho0: params.rho0,
            horizon: f64::INFINITY,
        });
    } else {
        x.ln_1p() / r
    };
    let diffusion_length = (params.mu * t_est).sqrt();
    let in_regime = diffusion_length <= params.eps;
    Ok(ThresholdEstimate {
        t_est,
        regime: Regime::SmallMu,
        validity: Validity {
            in_regime,
            condition: format!(
                "sqrt(mu t) <= eps ({diffusion_length:.4e} <= {:.4e}: {in_regime})",
                params.eps
            ),
        },
        error_order: ErrorOrder::Mu,
    })
}

/// `t = (1/(b - M00)) ln(1 + rho0 (b - M00) / (int s * n_bar))`.
pub fn t_threshold_large_mu(params: &ModelParams, n_mass: f64, m00: f64) -> Result<ThresholdEstimate> {
    params.validate()?;
    check_mass("n_mass", n_mass)?;
    let r = params.b() - m00;
    if r <= 0.0 {
        return Err(Error::NotApplicable(format!(
            "b - M00 = {r} <= 0: the leading-order output does not grow"
        )));
    }
    let t_est = (params.rho0 * r / (params.selection_integral() * n_mass)).ln_1p() / r;
    let in_regime = params.mu >= LARGE_MU_MIN;
    Ok(ThresholdEstimate {
        t_est,
        regime: Regime::LargeMu,
        validity: Validity {
            in_regime,
            condition: format!("mu >= {LARGE_MU_MIN} ({in_regime})"),
        },
        error_order: ErrorOrder::InverseMu,
    })
}
