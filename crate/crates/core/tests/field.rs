use std::f64::consts::{PI, SQRT_2};

use approx::assert_abs_diff_eq;
use gcselect_core::oracle::erf_series;
use gcselect_core::quadrature::{integrate, QuadConfig};
use gcselect_core::{
    inner_product, realize_initial, weighted_mass, Error, Field, Grid, InitialData, ModelParams,
    SelectionProfile,
};
use proptest::prelude::*;

#[test]
fn inner_product_of_constants_is_one() {
    let g = Grid::new(50).unwrap();
    let one = Field::constant(g, 1.0);
    assert_abs_diff_eq!(inner_product(&one, &one).unwrap(), 1.0, epsilon = 1e-14);
}

#[test]
fn normalized_cosine_has_unit_norm() {
    let g = Grid::new(1000).unwrap();
    let f = Field::from_fn(g, |x| SQRT_2 * (PI * x).cos());
    assert_abs_diff_eq!(inner_product(&f, &f).unwrap(), 1.0, epsilon = 1e-5);
}

#[test]
fn inner_product_of_x_with_itself() {
    let g = Grid::new(1000).unwrap();
    let f = Field::from_fn(g, |x| x);
    assert_abs_diff_eq!(inner_product(&f, &f).unwrap(), 1.0 / 3.0, epsilon = 1e-6);
}

#[test]
fn inner_product_rejects_mismatched_grids() {
    let a = Field::constant(Grid::new(10).unwrap(), 1.0);
    let b = Field::constant(Grid::new(20).unwrap(), 1.0);
    assert!(matches!(inner_product(&a, &b), Err(Error::GridMismatch { .. })));
}

#[test]
fn weighted_mass_is_exact_for_linear_fields() {
    let g = Grid::new(37).unwrap();
    let s = SelectionProfile::indicator(0.5, 1.0);
    assert_abs_diff_eq!(weighted_mass(&s, &Field::constant(g, 2.0)), 1.0, epsilon = 1e-15);
    // Breakpoint 0.1 falls strictly inside a cell of the 37-cell grid.
    let s = SelectionProfile::indicator(0.1, 1.0);
    assert_abs_diff_eq!(weighted_mass(&s, &Field::constant(g, 1.0)), 0.1, epsilon = 1e-15);
    let s = SelectionProfile::indicator(0.25, 1.0);
    assert_abs_diff_eq!(weighted_mass(&s, &Field::from_fn(g, |x| x)), 0.03125, epsilon = 1e-15);
}

#[test]
fn dirac_realization_has_unit_mass() {
    let g = Grid::new(100).unwrap();
    let f = realize_initial(&InitialData::Dirac(0.5), g).unwrap();
    assert_abs_diff_eq!(f.values()[50], 100.0, epsilon = 1e-12);
    assert_eq!(f.values().iter().filter(|v| **v != 0.0).count(), 1);
    assert_abs_diff_eq!(f.mass(), 1.0, epsilon = 1e-14);
    for n in [3, 17, 400] {
        let g = Grid::new(n).unwrap();
        for z in [0.01, 0.5, 0.99] {
            let f = realize_initial(&InitialData::Dirac(z), g).unwrap();
            assert_abs_diff_eq!(f.mass(), 1.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn random_initial_data_is_reproducible() {
    let g = Grid::new(64).unwrap();
    let data = InitialData::Random {
        seed: 7,
        lower: 0.0,
        upper: 1.0,
    };
    let a = realize_initial(&data, g).unwrap();
    let b = realize_initial(&data, g).unwrap();
    assert_eq!(a, b);
    assert!(a.values().iter().all(|v| (0.0..1.0).contains(v)));
    let other = InitialData::Random {
        seed: 8,
        lower: 0.0,
        upper: 1.0,
    };
    assert_ne!(a, realize_initial(&other, g).unwrap());
}

#[test]
fn invalid_inputs_are_rejected() {
    let g = Grid::new(10).unwrap();
    assert!(realize_initial(&InitialData::Dirac(1.5), g).is_err());
    assert!(realize_initial(&InitialData::Constant(-1.0), g).is_err());
    assert!(Grid::new(0).is_err());
    assert!(matches!(
        Grid::resolving(100, 0.01),
        Err(Error::UnresolvedWindow { .. })
    ));
    assert!(Grid::resolving(400, 0.01).is_ok());
    assert!(Field::new(g, vec![f64::NAN; 11]).is_err());
    assert!(Field::new(g, vec![0.0; 5]).is_err());
    let bad = ModelParams {
        mu: 0.0,
        ..ModelParams::default()
    };
    assert!(bad.validate().is_err());
    let bad = ModelParams {
        eps: 1.5,
        ..ModelParams::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn libm_erf_matches_maclaurin_series() {
    for i in 0..10 {
        let x = 0.2 * i as f64 + 0.05;
        let series = erf_series(x, 30);
        let lib = libm::erf(x);
        assert!((lib - series).abs() <= 1e-12 * series.abs(), "x = {x}");
        assert!((libm::erfc(x) - (1.0 - series)).abs() <= 1e-12);
    }
}

#[test]
fn adaptive_quadrature_handles_endpoint_singularity() {
    let r = integrate("sqrt", |x: f64| 1.0 / x.sqrt().max(1e-300), 0.0, 1.0, QuadConfig::default()).unwrap();
    assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-8);
    let r = integrate("gauss", |x: f64| (-x * x).exp(), -6.0, 6.0, QuadConfig::default()).unwrap();
    assert_abs_diff_eq!(r.value, PI.sqrt(), epsilon = 1e-12);
}

proptest! {
    #[test]
    fn inner_product_is_symmetric_and_bilinear(
        a in prop::collection::vec(-10.0f64..10.0, 21),
        b in prop::collection::vec(-10.0f64..10.0, 21),
        c in prop::collection::vec(-10.0f64..10.0, 21),
        alpha in -3.0f64..3.0,
    ) {
        let g = Grid::new(20).unwrap();
        let (fa, fb, fc) = (
            Field::new(g, a).unwrap(),
            Field::new(g, b).unwrap(),
            Field::new(g, c).unwrap(),
        );
        let ab = inner_product(&fa, &fb).unwrap();
        prop_assert!((ab - inner_product(&fb, &fa).unwrap()).abs() <= 1e-12 * (1.0 + ab.abs()));
        let lhs = inner_product(&fa.add_scaled(alpha, &fc).unwrap(), &fb).unwrap();
        let rhs = ab + alpha * inner_product(&fc, &fb).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn weighted_mass_of_linear_field_is_grid_independent(
        n in 10usize..200,
        eps in 0.05f64..1.0,
        slope in -1.0f64..1.0,
        intercept in 1.0f64..2.0,
    ) {
        let s = SelectionProfile::indicator(eps, 1.0);
        let f = Field::from_fn(Grid::new(n).unwrap(), |x| intercept + slope * x);
        let exact = intercept * eps + slope * eps * eps / 2.0;
        prop_assert!((weighted_mass(&s, &f) - exact).abs() <= 1e-13);
    }

    #[test]
    fn dirac_mass_is_one_on_any_grid(n in 2usize..500, z in 0.001f64..0.999) {
        let f = realize_initial(&InitialData::Dirac(z), Grid::new(n).unwrap()).unwrap();
        prop_assert!((f.mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn erfc_is_accurate_against_series(x in 0.0f64..1.5) {
        let series = 1.0 - erf_series(x, 40);
        prop_assert!((libm::erfc(x) - series).abs() <= 1e-12 * series.max(1e-3));
    }
}
