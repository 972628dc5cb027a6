use std::f64::consts::PI;

use arcsine_core::potential::potential_density_closed;
use arcsine_core::rate::{estimate_rate, log_grid};
use arcsine_core::special::{beta_cdf, beta_density};
use arcsine_core::undershoot::*;
use arcsine_core::{ExponentModel, InversionParams, Method, Regime};
use proptest::prelude::*;

fn stable_sum() -> ExponentModel {
    ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).unwrap()
}

fn params(m: &ExponentModel) -> InversionParams {
    InversionParams::for_model(m)
}

#[test]
fn density_near_beta_at_large_levels() {
    let m = stable_sum();
    let s: f64 = 1e3;
    let d = undershoot_density(&m, s, 0.5, &params(&m), Method::Auto).unwrap();
    assert!((d - beta_density(0.3, 0.5).unwrap()).abs() <= s.powf(-0.4), "{d}");

    let g = ExponentModel::geometric(0.5).unwrap();
    let s: f64 = 1e4;
    let d = undershoot_density(&g, s, 0.5, &params(&g), Method::Auto).unwrap();
    assert!((d - 2.0 / PI).abs() <= s.powf(-0.5), "{d}");
}

#[test]
fn interval_probability_near_beta() {
    let m = stable_sum();
    let s: f64 = 1e3;
    let p = interval_prob(&m, s, 0.2, 0.8, &params(&m), Method::Auto).unwrap();
    let want = beta_cdf(0.3, 0.8).unwrap() - beta_cdf(0.3, 0.2).unwrap();
    assert!((p - want).abs() <= s.powf(-0.4), "{p} vs {want}");
}

#[test]
fn interval_probability_adds_up() {
    let m = stable_sum();
    let p = params(&m);
    let whole = interval_prob(&m, 7.0, 0.1, 0.9, &p, Method::Auto).unwrap();
    let parts = interval_prob(&m, 7.0, 0.1, 0.35, &p, Method::Auto).unwrap()
        + interval_prob(&m, 7.0, 0.35, 0.6, &p, Method::Auto).unwrap()
        + interval_prob(&m, 7.0, 0.6, 0.9, &p, Method::Auto).unwrap();
    assert!((whole - parts).abs() < 1e-9, "{whole} vs {parts}");
}

#[test]
fn mass_is_conserved_for_every_family() {
    let models = [
        stable_sum(),
        ExponentModel::stable_sum(1.0, 1.0, 0.5, 1.0).unwrap(),
        ExponentModel::geometric(0.5).unwrap(),
        ExponentModel::stable_plus_geometric(0.5, 0.7).unwrap(),
    ];
    for m in &models {
        for &s in &[0.5, 5.0, 50.0] {
            let b = undershoot_mass(m, s, &params(m), Method::Auto).unwrap();
            assert!((b.total - 1.0).abs() < 1e-6, "{:?} s={s}: {b:?}", m.family());
        }
    }
}

#[test]
fn drift_atom_is_b_times_u() {
    let m = ExponentModel::stable_sum(1.0, 2.0, 0.5, 1.0).unwrap();
    for &s in &[0.5, 5.0, 50.0] {
        let a = atom_at_level(&m, s, &params(&m), Method::Auto).unwrap();
        assert!(a > 0.0);
        assert!((a - 2.0 * potential_density_closed(&m, s).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn first_correction_doubles_the_rate() {
    let m = stable_sum();
    let p = params(&m);
    let pts: Vec<(f64, f64)> = log_grid(1e2, 1e4, 5)
        .into_iter()
        .map(|s| (s, sup_error(&m, s, 0.2, 0.8, 1, Regime::LongRange, 33, &p, Method::Auto).unwrap()))
        .collect();
    let fit = estimate_rate(&pts, -0.8, 0.15).unwrap();
    assert!(fit.pass, "{fit:?}");
}

#[test]
fn sup_error_decreases_with_order() {
    let m = stable_sum();
    let p = params(&m);
    for &s in &[1e2, 1e3, 1e4] {
        let e: Vec<f64> = (0..3)
            .map(|n| sup_error(&m, s, 0.2, 0.8, n, Regime::LongRange, 33, &p, Method::Auto).unwrap())
            .collect();
        assert!(e[0] >= e[1] && e[1] >= e[2], "s={s}: {e:?}");
        assert!(e[2] > 0.0);
    }
}

#[test]
fn short_range_rates() {
    let m = stable_sum();
    let p = params(&m);
    for n in 0..3 {
        let pts: Vec<(f64, f64)> = log_grid(1e-4, 1e-2, 5)
            .into_iter()
            .map(|s| (s, sup_error(&m, s, 0.2, 0.8, n, Regime::ShortRange, 33, &p, Method::Auto).unwrap()))
            .collect();
        let fit = estimate_rate(&pts, 0.4 * (n + 1) as f64, 0.15).unwrap();
        assert!(fit.pass, "n={n}: {fit:?}");
    }
}

#[test]
fn stable_plus_geometric_short_range_bound() {
    let m = ExponentModel::stable_plus_geometric(0.5, 0.5).unwrap();
    let p = params(&m);
    for s in log_grid(1e-5, 1e-2, 4) {
        let e = sup_error(&m, s, 0.2, 0.8, 0, Regime::ShortRange, 17, &p, Method::Auto).unwrap();
        assert!(e <= 0.5 * s.sqrt() * s.ln().abs(), "s={s}: {e}");
    }
}

#[test]
fn grid_refinement_is_stable() {
    let m = stable_sum();
    let p = params(&m);
    let a = sup_error(&m, 1e3, 0.2, 0.8, 0, Regime::LongRange, 32, &p, Method::Auto).unwrap();
    let b = sup_error(&m, 1e3, 0.2, 0.8, 0, Regime::LongRange, 64, &p, Method::Auto).unwrap();
    assert!((a - b).abs() < 0.1 * b);
}

#[test]
fn remainder_shape_is_positive() {
    let m = stable_sum();
    let v = eps3_shape(&m, 100.0, 0.5, 1, Regime::LongRange).unwrap();
    assert!(v > 0.0 && v.is_finite());
    let spg = ExponentModel::stable_plus_geometric(0.5, 0.5).unwrap();
    let v = eps3_shape(&spg, 0.01, 0.5, 0, Regime::ShortRange).unwrap();
    assert!(v > 0.0 && v.is_finite());
}

#[test]
fn fourier_and_closed_form_densities_agree() {
    let m = stable_sum();
    let p = params(&m);
    for &(s, x) in &[(0.5, 0.3), (20.0, 0.7), (500.0, 0.5)] {
        let a = undershoot_density(&m, s, x, &p, Method::ClosedForm).unwrap();
        let b = undershoot_density(&m, s, x, &p, Method::Inversion).unwrap();
        assert!((a - b).abs() < 1e-7 * a, "s={s} x={x}: {a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_is_nonnegative(s in 1e-3f64..1e4, x in 0.001f64..0.999, a in 0.05f64..0.9, d in 0.05f64..0.5) {
        let beta = (a + d).min(1.0);
        let m = ExponentModel::stable_sum(1.0, 1.0, a, beta).unwrap();
        let v = undershoot_density(&m, s, x, &params(&m), Method::Auto).unwrap();
        prop_assert!(v >= 0.0 && v.is_finite());
    }

    #[test]
    fn leading_approximation_is_beta(a in 0.05f64..0.9, x in 0.001f64..0.999, s in 1.0f64..1e6) {
        let m = ExponentModel::stable_sum(2.0, 0.5, a, 1.0).unwrap();
        prop_assert_eq!(undershoot_approx_long(&m, s, x, 0).unwrap(), beta_density(a, x).unwrap());
    }
}
