use std::f64::consts::LN_2;

use approx::assert_abs_diff_eq;
use gcselect_core::convergence::observed_order;
use gcselect_core::fem::{
    assemble, discrete_balance_residual, run, step, time_to_threshold_extrapolated,
    time_to_threshold_numeric, time_to_threshold_with, BalanceRule, FemConfig, MassMatrix, QRegime,
};
use gcselect_core::spectral::{eigs_exact, modal_solution, time_to_threshold_spectral, ModalCoefficients};
use gcselect_core::{Error, Field, Grid, InitialData, ModelParams, SelectionProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(q0: f64, d: f64, mu: f64, eps: f64, rho0: f64) -> ModelParams {
    ModelParams {
        q0,
        q1: 0.0,
        d,
        mu,
        eps,
        rho0,
        s0: 1.0,
    }
}

#[test]
fn assembled_matrices_have_the_expected_sums() {
    let grid = Grid::new(40).unwrap();
    let p = params(2.0, 0.0, 0.7, 0.13, 1.0);
    let m = assemble(grid, &p, &p.profile()).unwrap();
    for r in m.stiffness.row_sums() {
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(m.mass.row_sums().iter().sum::<f64>(), 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(m.selection.row_sums().iter().sum::<f64>(), 0.13, epsilon = 1e-15);
    assert!(m.mass.is_symmetric(1e-15));
    assert!(m.stiffness.is_symmetric(1e-15));
    assert!(m.selection.is_symmetric(1e-15));
}

#[test]
fn assemble_rejects_unresolved_window() {
    let p = params(2.0, 0.0, 1.0, 0.01, 1.0);
    assert!(matches!(
        assemble(Grid::new(100).unwrap(), &p, &p.profile()),
        Err(Error::UnresolvedWindow { .. })
    ));
}

#[test]
fn step_preserves_steady_state_without_selection() {
    let grid = Grid::new(30).unwrap();
    let p = params(1.5, 1.5, 0.3, 0.2, 1.0);
    let m = assemble(grid, &p, &SelectionProfile::zero()).unwrap();
    let mut n = Field::constant(grid, 2.5);
    let mut rho = 0.0;
    for _ in 0..10 {
        (n, rho) = step(&n, rho, &p, &m, 0.1).unwrap();
    }
    for v in n.values() {
        assert_abs_diff_eq!(*v, 2.5, epsilon = 1e-12);
    }
    assert_eq!(rho, 0.0);
}

#[test]
fn step_is_implicit_euler_on_the_mass() {
    let grid = Grid::new(30).unwrap();
    let p = params(2.0, 0.5, 0.3, 0.2, 1.0);
    let m = assemble(grid, &p, &SelectionProfile::zero()).unwrap();
    let dt = 0.05;
    let (n, _) = step(&Field::constant(grid, 1.0), 0.0, &p, &m, dt).unwrap();
    assert_abs_diff_eq!(n.mass(), 1.0 / (1.0 - 1.5 * dt), epsilon = 1e-13);
}

#[test]
fn uniform_selection_reaches_threshold_at_ln2() {
    let p = params(2.0, 0.0, 1.0, 1.0, 1.0);
    let t = time_to_threshold_numeric(&InitialData::Constant(1.0), &p, Grid::new(200).unwrap(), 1e-4)
        .unwrap();
    assert_abs_diff_eq!(t, LN_2, epsilon = 1e-3);
}

#[test]
fn threshold_crossing_lands_rho_on_rho0() {
    let p = ModelParams {
        q1: 0.5,
        ..params(2.0, 0.0, 1.0, 0.1, 0.3)
    };
    let mut cfg = FemConfig::new(Grid::new(100).unwrap(), 0.01, 3.0);
    cfg.snapshot_times = vec![0.5, 1.234];
    let rec = run(&InitialData::Constant(1.0), &p, &cfg).unwrap();
    let t = rec.threshold_time.unwrap();
    let i = rec.times.iter().position(|s| *s == t).unwrap();
    assert_abs_diff_eq!(rec.rho_series[i], 0.3, epsilon = 1e-12);
    assert!(rec.q_regime_series[..=i].iter().all(|q| *q == QRegime::BeforeThreshold));
    assert!(rec.q_regime_series[i + 1..].iter().all(|q| *q == QRegime::AfterThreshold));
    assert!(rec.is_rho_nondecreasing());
    assert_abs_diff_eq!(*rec.times.last().unwrap(), 3.0, epsilon = 1e-12);
    assert_eq!(rec.snapshots.len(), 2);
    assert_eq!(rec.snapshot_at(1.234).unwrap().values().len(), 101);
    let b = discrete_balance_residual(&rec, &p, BalanceRule::Matched);
    assert!(b.max_rate <= 1e-10, "{b:?}");
}

#[test]
fn stop_at_threshold_ends_the_record() {
    let p = params(2.0, 0.0, 1.0, 0.1, 0.3);
    let mut cfg = FemConfig::new(Grid::new(100).unwrap(), 0.01, 3.0);
    cfg.stop_at_threshold = true;
    let rec = run(&InitialData::Constant(1.0), &p, &cfg).unwrap();
    assert_eq!(rec.threshold_time, Some(*rec.times.last().unwrap()));
    cfg.t_max = 0.01;
    let rec = run(&InitialData::Constant(1.0), &p, &cfg).unwrap();
    assert_eq!(rec.threshold_time, None);
}

#[test]
fn balance_residual_matched_rule_is_round_off() {
    let p = params(0.1, 0.0, 1.0, 0.01, 1e9);
    let cfg = FemConfig::new(Grid::new(400).unwrap(), 1e-3, 5.0);
    let rec = run(&InitialData::Constant(1.0), &p, &cfg).unwrap();
    assert!(discrete_balance_residual(&rec, &p, BalanceRule::Matched).max_rate <= 1e-10);
}

#[test]
fn balance_residual_trapezoid_rule_is_second_order_per_step() {
    let p = params(2.0, 0.0, 1.0, 0.1, 1e9);
    let grid = Grid::new(100).unwrap();
    let residual = |dt: f64| {
        let rec = run(&InitialData::Constant(1.0), &p, &FemConfig::new(grid, dt, 0.5)).unwrap();
        discrete_balance_residual(&rec, &p, BalanceRule::Trapezoid).max_step
    };
    let order = observed_order(residual(0.01), residual(0.005), 2.0);
    assert!((1.8..2.3).contains(&order), "order {order}");
}

#[test]
fn balance_residual_of_empty_record_is_zero() {
    let p = params(2.0, 0.0, 1.0, 0.1, 1.0);
    let mut cfg = FemConfig::new(Grid::new(50).unwrap(), 0.1, 1.0);
    cfg.t_max = 1e-300;
    let rec = gcselect_core::fem::Simulation::new(&InitialData::Constant(1.0), &p, &cfg)
        .unwrap()
        .into_record();
    assert_eq!(discrete_balance_residual(&rec, &p, BalanceRule::Matched).max_step, 0.0);
}

#[test]
fn output_saturates_when_post_threshold_growth_is_negative() {
    let p = params(3.0, 1.0, 1.0, 0.1, 1.0);
    let rec = run(
        &InitialData::Constant(1.0),
        &p,
        &FemConfig::new(Grid::new(100).unwrap(), 0.01, 200.0),
    )
    .unwrap();
    assert!(rec.threshold_time.is_some());
    assert!(rec.final_rho() - rec.rho_at(100.0) <= 1e-6);
    assert!(rec.final_state.norm() < 1e-30);
}

#[test]
fn population_decays_after_threshold_once_the_transient_passes() {
    let p = params(3.0, 1.0, 1.0, 0.1, 1.0);
    let mut cfg = FemConfig::new(Grid::new(100).unwrap(), 0.01, 20.0);
    cfg.snapshot_times = (1..=20).map(f64::from).collect();
    let rec = run(&InitialData::Constant(1.0), &p, &cfg).unwrap();
    let t0 = rec.threshold_time.unwrap();
    let norms: Vec<f64> = rec
        .snapshots
        .iter()
        .filter(|(t, _)| *t > t0 + 1.0)
        .map(|(_, f)| f.norm())
        .collect();
    assert!(norms.len() > 10);
    assert!(norms.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn unreachable_threshold_is_reported() {
    let p = params(0.5, 1.0, 1.0, 0.1, 10.0);
    let r = time_to_threshold_numeric(&InitialData::Constant(1.0), &p, Grid::new(50).unwrap(), 0.01);
    assert!(matches!(r, Err(Error::ThresholdUnreachable { .. })));
}

#[test]
fn lumped_mass_keeps_small_mu_runs_nonnegative() {
    let p = params(2.0, 0.0, 1e-4, 0.1, 1.0);
    let mut cfg = FemConfig::new(Grid::new(400).unwrap(), 1e-3, 2.0);
    cfg.mass = MassMatrix::Lumped;
    let rec = run(&InitialData::Dirac(0.5), &p, &cfg).unwrap();
    assert!(rec.min_value >= 0.0);
    assert!(rec.is_rho_nondecreasing());
    assert!(discrete_balance_residual(&rec, &p, BalanceRule::Matched).max_rate <= 1e-10);
}

#[test]
fn consistent_mass_is_nonnegative_at_moderate_mu() {
    let p = params(2.0, 0.0, 1.0, 0.1, 1.0);
    let init = InitialData::Random {
        seed: 3,
        lower: 0.0,
        upper: 1.0,
    };
    let rec = run(&init, &p, &FemConfig::new(Grid::new(400).unwrap(), 1e-3, 2.0)).unwrap();
    assert!(rec.min_value >= 0.0);
}

fn modal_reference(p: &ModelParams, grid: Grid, t: f64) -> Field {
    let pairs = eigs_exact(p, 64, grid).unwrap();
    let coeffs = ModalCoefficients::new(&InitialData::Constant(1.0), &pairs, p.b(), grid).unwrap();
    modal_solution(&coeffs, &pairs, t).field
}

/// Richardson-in-time FEM state, so the spatial error dominates.
fn fem_state(p: &ModelParams, grid: Grid, dt: f64, t: f64) -> Field {
    let at = |dt: f64| {
        run(&InitialData::Constant(1.0), p, &FemConfig::new(grid, dt, t))
            .unwrap()
            .final_state
    };
    at(dt / 2.0).scaled(2.0).add_scaled(-1.0, &at(dt)).unwrap()
}

#[test]
fn spatial_convergence_is_second_order() {
    let p = params(2.0, 0.0, 1.0, 0.125, 1e9);
    let t = 0.1;
    let errors: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let grid = Grid::new(n).unwrap();
            fem_state(&p, grid, 1e-4, t)
                .distance(&modal_reference(&p, grid, t))
                .unwrap()
        })
        .collect();
    for w in errors.windows(2) {
        let order = observed_order(w[0], w[1], 2.0);
        assert!(order >= 1.9, "errors {errors:?}");
    }
}

#[test]
fn temporal_convergence_is_first_order() {
    let p = params(2.0, 0.0, 1.0, 0.1, 1e9);
    let grid = Grid::new(400).unwrap();
    let t = 0.5;
    let reference = modal_reference(&p, grid, t);
    let errors: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| {
            run(&InitialData::Constant(1.0), &p, &FemConfig::new(grid, dt, t))
                .unwrap()
                .final_state
                .distance(&reference)
                .unwrap()
        })
        .collect();
    for w in errors.windows(2) {
        let order = observed_order(w[0], w[1], 2.0);
        assert!(order >= 0.9, "errors {errors:?}");
    }
}

#[test]
fn fem_snapshot_matches_modal_solution() {
    let p = params(2.0, 0.0, 1.0, 0.1, 1e9);
    let grid = Grid::new(400).unwrap();
    let fem = fem_state(&p, grid, 1e-3, 1.0);
    let dist = fem.distance(&modal_reference(&p, grid, 1.0)).unwrap();
    assert!(dist <= 1e-4, "distance {dist}");
}

#[test]
fn threshold_time_agrees_with_spectral_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid = Grid::new(400).unwrap();
    let mut cases = vec![params(2.0, 0.0, 1.0, 0.1, 1.0)];
    for _ in 0..10 {
        cases.push(params(
            rng.gen_range(1.0..3.0),
            rng.gen_range(0.0..0.5),
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.05..0.5),
            rng.gen_range(0.5..20.0),
        ));
    }
    for p in cases {
        let pairs = eigs_exact(&p, 64, grid).unwrap();
        let coeffs = ModalCoefficients::new(&InitialData::Constant(1.0), &pairs, p.b(), grid).unwrap();
        let t_spec = time_to_threshold_spectral(&coeffs, p.rho0).unwrap();
        let cfg = FemConfig::new(grid, 2e-3, 8.0);
        let t_fem = time_to_threshold_extrapolated(&InitialData::Constant(1.0), &p, &cfg).unwrap();
        let rel = (t_fem - t_spec).abs() / t_spec;
        assert!(rel <= 1e-3, "{p:?}: fem {t_fem} spectral {t_spec}");
    }
}

#[test]
fn horizon_doubling_finds_late_crossings() {
    let p = params(0.1, 0.0, 1.0, 0.01, 50.0);
    let cfg = FemConfig::new(Grid::new(400).unwrap(), 0.05, 1.0);
    let t = time_to_threshold_with(&InitialData::Constant(1.0), &p, &cfg).unwrap();
    assert!(t > 1.0);
}
