//! Mittag-Leffler values against frozen high-precision references
//! (see `oracle/generate.py`).

use arcsine_core::special::{mittag_leffler, ml_asymptotic, ml_asymptotic_optimal, MLParams};

fn table() -> Vec<(f64, f64, f64, f64)> {
    include_str!("oracle/mittag_leffler.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], v[1], v[2], v[3])
        })
        .collect()
}

#[test]
fn matches_reference_table() {
    let mut worst = 0.0f64;
    for (a, b, x, want) in table() {
        let p = MLParams::new(a, b).unwrap();
        let got = mittag_leffler(&p, x).unwrap_or_else(|e| panic!("a={a} b={b} x={x}: {e}"));
        let rel = ((got - want) / want).abs();
        worst = worst.max(rel);
        assert!(rel <= 1e-10, "a={a} b={b} x={x}: got {got:e} want {want:e} rel {rel:e}");
    }
    eprintln!("worst relative error {worst:e}");
}

#[test]
fn minus_fifty_case() {
    let p = MLParams::new(0.4, 0.7).unwrap();
    let got = mittag_leffler(&p, -50.0).unwrap();
    let want = 0.006_720_645_513_889_124;
    assert!(((got - want) / want).abs() <= 1e-8);
}

#[test]
fn erfc_identity() {
    // E_{1/2,1}(-1) = e erfc(1)
    let p = MLParams::new(0.5, 1.0).unwrap();
    let want = 1f64.exp() * statrs::function::erf::erfc(1.0);
    let got = mittag_leffler(&p, -1.0).unwrap();
    // statrs' erfc is itself only good to about 1e-11.
    assert!(((got - want) / want).abs() <= 1e-10, "{got:e} {want:e}");
    let reference = 0.427_583_576_155_807;
    assert!(((got - reference) / reference).abs() <= 1e-13);
}

#[test]
fn asymptotic_remainder_order() {
    // |E - S_3| should scale like x^{-5}; fit the constant on [50, 200].
    let p = MLParams::new(0.4, 0.7).unwrap();
    let mut consts = Vec::new();
    for &x in &[50.0, 80.0, 120.0, 200.0] {
        let e = mittag_leffler(&p, -x).unwrap();
        let s = ml_asymptotic(&p, x, 3).unwrap();
        consts.push((e - s).abs() * x.powi(5));
    }
    let c = consts.iter().cloned().fold(0.0, f64::max);
    let e = mittag_leffler(&p, -100.0).unwrap();
    let s = ml_asymptotic(&p, 100.0, 3).unwrap();
    assert!((e - s).abs() <= c * 100f64.powi(-5));
    // The constant is stable (the remainder is genuinely fifth order).
    let lo = consts.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(c / lo < 1.5, "{consts:?}");
}

#[test]
fn half_half_leading_term_vanishes() {
    let p = MLParams::new(0.5, 0.5).unwrap();
    assert_eq!(ml_asymptotic(&p, 10.0, 0).unwrap(), 0.0);
    let v = mittag_leffler(&p, -10.0).unwrap();
    assert!(v > 1e-3 && v < 1e-2, "{v}");
}

#[test]
fn crossover_band_agreement() {
    for &(a, b) in &[(0.4, 0.7), (0.5, 1.0), (0.7, 0.9), (0.3, 1.0)] {
        let p = MLParams::new(a, b).unwrap();
        for i in 0..=8 {
            let x = 24.0 + 1.5 * i as f64;
            let asym = ml_asymptotic_optimal(a, b, x);
            // Below the switch radius the evaluator does not use the
            // asymptotic expansion, so this compares two independent routes.
            let forced = p.with_switch_radius(1e6).unwrap();
            let v = mittag_leffler(&forced, -x).unwrap();
            let tol = asym.abs_err.max(1e-12 * v.abs());
            assert!((asym.value - v).abs() <= 2.0 * tol, "a={a} b={b} x={x}");
        }
    }
}
