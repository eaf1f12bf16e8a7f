use approx::assert_abs_diff_eq;
use gcselect_core::asymptotics::{
    t_threshold_large_mu, t_threshold_narrow_eps, t_threshold_narrow_eps_leading,
    t_threshold_small_mu, ErrorOrder, Regime,
};
use gcselect_core::fem::{time_to_threshold_extrapolated, FemConfig};
use gcselect_core::spectral::overlap_matrix;
use gcselect_core::{Error, Grid, InitialData, ModelParams};
use proptest::prelude::*;

fn params(q0: f64, mu: f64, eps: f64, rho0: f64) -> ModelParams {
    ModelParams {
        q0,
        q1: 0.0,
        d: 0.0,
        mu,
        eps,
        rho0,
        s0: 1.0,
    }
}

#[test]
fn narrow_window_formula_arithmetic() {
    let e = t_threshold_narrow_eps(&params(2.0, 1.0, 0.01, 100.0), 1.0).unwrap();
    assert_abs_diff_eq!(e.t_est, 0.5 * 20001f64.ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(e.t_est, 4.9517, epsilon = 1e-4);
    assert_eq!(e.regime, Regime::NarrowEps);
    assert_eq!(e.error_order, ErrorOrder::SqrtEpsLogEps);
    assert!(e.validity.in_regime);
    let tiny = t_threshold_narrow_eps(&params(2.0, 1.0, 0.01, 1e-12), 1.0).unwrap();
    assert!(tiny.t_est < 1e-9);
}

#[test]
fn narrow_window_flags_and_errors() {
    let below_gap = t_threshold_narrow_eps(&params(2.0, 0.1, 0.01, 1.0), 1.0).unwrap();
    assert!(!below_gap.validity.in_regime);
    assert!(below_gap.validity.condition.contains("mu > b/pi^2"));
    let wide = t_threshold_narrow_eps(&params(2.0, 1.0, 0.5, 1.0), 1.0).unwrap();
    assert!(!wide.validity.in_regime);
    let mut decaying = params(1.0, 1.0, 0.01, 1.0);
    decaying.d = 1.5;
    assert!(matches!(
        t_threshold_narrow_eps(&decaying, 1.0),
        Err(Error::NotApplicable(_))
    ));
    assert!(t_threshold_narrow_eps(&params(2.0, 1.0, 0.01, 1.0), 0.0).is_err());
}

#[test]
fn leading_form_agrees_as_the_window_narrows() {
    let mut prev = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let p = params(2.0, 1.0, eps, 1.0);
        let full = t_threshold_narrow_eps(&p, 1.0).unwrap().t_est;
        let leading = t_threshold_narrow_eps_leading(&p, 1.0).unwrap();
        let gap = (full - leading).abs();
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 1e-4);
}

#[test]
fn small_mu_formula_arithmetic() {
    let p = params(2.0, 1e-4, 0.1, 1.0);
    let e = t_threshold_small_mu(&p, 0.1).unwrap();
    assert_abs_diff_eq!(e.t_est, 11f64.ln(), epsilon = 1e-12);
    assert_eq!(e.regime, Regime::SmallMu);
    assert_eq!(e.error_order, ErrorOrder::Mu);
    assert!(e.validity.in_regime);
    assert!(!t_threshold_small_mu(&params(2.0, 1.0, 0.1, 1.0), 0.1).unwrap().validity.in_regime);
}

#[test]
fn small_mu_degenerate_and_unreachable_cases() {
    let p = params(1.0, 1e-4, 0.1, 3.0);
    assert_abs_diff_eq!(t_threshold_small_mu(&p, 0.1).unwrap().t_est, 30.0, epsilon = 1e-12);
    let near = params(1.0 + 1e-9, 1e-4, 0.1, 3.0);
    assert_abs_diff_eq!(t_threshold_small_mu(&near, 0.1).unwrap().t_est, 30.0, epsilon = 1e-6);
    assert!(matches!(
        t_threshold_small_mu(&p, 0.0),
        Err(Error::NotApplicable(_))
    ));
    let shrinking = params(0.5, 1e-4, 0.1, 1.0);
    assert!(matches!(
        t_threshold_small_mu(&shrinking, 0.1),
        Err(Error::ThresholdUnreachable { .. })
    ));
}

#[test]
fn large_mu_formula_arithmetic() {
    let p = params(2.0, 10.0, 0.1, 1.0);
    let m00 = overlap_matrix(&p.profile(), 1)[(0, 0)];
    let e = t_threshold_large_mu(&p, 1.0, m00).unwrap();
    assert_abs_diff_eq!(e.t_est, 20f64.ln() / 1.9, epsilon = 1e-12);
    assert_abs_diff_eq!(e.t_est, 1.5767, epsilon = 1e-4);
    assert_eq!(e.error_order, ErrorOrder::InverseMu);
    assert!(e.validity.in_regime);
    assert!(!t_threshold_large_mu(&params(2.0, 0.1, 0.1, 1.0), 1.0, m00).unwrap().validity.in_regime);
    assert!(matches!(
        t_threshold_large_mu(&params(0.05, 10.0, 0.1, 1.0), 1.0, m00),
        Err(Error::NotApplicable(_))
    ));
}

#[test]
fn narrow_and_small_mu_formulas_differ_only_in_rate() {
    let p = params(2.0, 1e-4, 0.05, 7.0);
    let n_mass = 1.3;
    let small = t_threshold_small_mu(&p, p.eps * n_mass).unwrap().t_est;
    let shifted = ModelParams { d: p.s0, ..p };
    let narrow = t_threshold_narrow_eps(&shifted, n_mass).unwrap().t_est;
    assert_abs_diff_eq!(small, narrow, epsilon = 1e-13);
}

#[test]
fn regimes_agree_where_they_overlap() {
    let p = params(2.0, 50.0, 0.01, 1.0);
    let narrow = t_threshold_narrow_eps(&p, 1.0).unwrap();
    let m00 = overlap_matrix(&p.profile(), 1)[(0, 0)];
    let large = t_threshold_large_mu(&p, 1.0, m00).unwrap();
    assert!(narrow.validity.in_regime && large.validity.in_regime);
    assert!((narrow.t_est - large.t_est).abs() <= 0.05 * large.t_est);
    let cfg = FemConfig::new(Grid::new(400).unwrap(), 1e-3, 8.0);
    let t_fem = time_to_threshold_extrapolated(&InitialData::Constant(1.0), &p, &cfg).unwrap();
    // O(1/mu) and O(sqrt(eps) |ln eps|) at mu = 50, eps = 0.01.
    assert!((t_fem - large.t_est).abs() <= 0.05, "fem {t_fem} large {}", large.t_est);
    assert!((t_fem - narrow.t_est).abs() <= 0.5, "fem {t_fem} narrow {}", narrow.t_est);
}

proptest! {
    #[test]
    fn estimators_increase_with_threshold_and_decrease_with_mass(
        rho0 in 0.01f64..100.0,
        factor in 1.01f64..10.0,
        mass in 0.1f64..10.0,
        eps in 0.01f64..0.2,
    ) {
        let p = params(2.0, 1.0, eps, rho0);
        let q = ModelParams { rho0: rho0 * factor, ..p };
        let m00 = eps;
        prop_assert!(t_threshold_narrow_eps(&q, mass).unwrap().t_est > t_threshold_narrow_eps(&p, mass).unwrap().t_est);
        prop_assert!(t_threshold_large_mu(&q, mass, m00).unwrap().t_est > t_threshold_large_mu(&p, mass, m00).unwrap().t_est);
        prop_assert!(t_threshold_small_mu(&q, eps * mass).unwrap().t_est > t_threshold_small_mu(&p, eps * mass).unwrap().t_est);
        prop_assert!(t_threshold_narrow_eps(&p, mass * factor).unwrap().t_est < t_threshold_narrow_eps(&p, mass).unwrap().t_est);
        prop_assert!(t_threshold_large_mu(&p, mass * factor, m00).unwrap().t_est < t_threshold_large_mu(&p, mass, m00).unwrap().t_est);
        prop_assert!(t_threshold_small_mu(&p, eps * mass * factor).unwrap().t_est < t_threshold_small_mu(&p, eps * mass).unwrap().t_est);
        prop_assert!(t_threshold_narrow_eps(&p, mass).unwrap().t_est > 0.0);
    }
}
