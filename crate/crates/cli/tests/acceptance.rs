//! Acceptance gate: one PASS/FAIL line per criterion, with runtime.
//!
//! Two outcomes are known to be unattainable as stated (criterion 7's
//! two-sided slope and criterion 9's sample mean). Each such FAIL is
//! tolerated only when the run reproduces the mechanism behind it; any other
//! FAIL makes the target exit nonzero.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use arcsine_core::montecarlo::{simulate_undershoot, transform_check, undershoot_cdf_table, SimConfig};
use arcsine_core::potential::{
    eval_expansion, expansion_series_long, expansion_series_short, laplace_check, potential_density_closed,
    potential_density_fourier,
};
use arcsine_core::rate::{estimate_rate, log_grid, RateFit};
use arcsine_core::special::{beta_cdf, laurent_coeffs, mittag_leffler, recip_gamma_real, MLParams};
use arcsine_core::undershoot::{atom_at_level, sup_error, undershoot_mass};
use arcsine_core::{ExponentModel, InversionParams, Method, Regime};

struct Verdict {
    pass: bool,
    detail: String,
    /// Why a failure is expected, when the run shows the expected mechanism.
    known: Option<&'static str>,
}

type Check = fn() -> Result<Verdict, String>;

const GEOMETRIC_RATE_NOTE: &str = "at alpha = 1/2 the s^-alpha coefficients carry 1/Gamma(0) = 0, \
     so the error decays like s^-2alpha; the fitted slope matches -2alpha and satisfies the bound";
const MC_MEAN_NOTE: &str = "the exact undershoot law at s = 200 has mean below 0.49 (an O(s^-alpha) \
     mass near 0 with a 1/log tail); the samples match that law, so no simulation can reach 0.5 +- 0.01 at this level";

fn main() {
    let criteria: [(u32, &str, u64, Check); 11] = [
        (1, "Laurent coefficients and convolution identity", 1, laurent),
        (2, "Fourier inversion vs Mittag-Leffler closed form", 30, oracle_triangle),
        (3, "Laplace-transform identity, three families", 120, laplace),
        (4, "long-range expansion remainder slopes", 60, long_range_expansion),
        (5, "short-range expansion remainder slopes", 60, short_range_expansion),
        (6, "undershoot rate, stable sum", 180, stable_sum_rate),
        (7, "undershoot rate, geometric stable", 600, geometric_rate),
        (8, "mass conservation and drift atom", 120, mass),
        (9, "Monte Carlo vs arcsine law", 300, monte_carlo),
        (10, "sampler transform checks", 180, transforms),
        (11, "special-function identities", 5, special_functions),
    ];
    let mut unexpected = 0;
    for (id, name, budget, check) in criteria {
        let t0 = Instant::now();
        let outcome = check();
        let elapsed = t0.elapsed();
        let in_budget = elapsed <= Duration::from_secs(budget);
        let (pass, detail, known) = match outcome {
            Ok(v) => (v.pass && in_budget, v.detail, v.known),
            Err(e) => (false, format!("error: {e}"), None),
        };
        let status = if pass { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {id:>2} [{:>7.2}s / {budget}s] {name}: {detail}",
            elapsed.as_secs_f64()
        );
        if !pass {
            match known {
                Some(why) if in_budget => println!("     known-unattainable: {why}"),
                _ => unexpected += 1,
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}

fn fit_text(f: &RateFit) -> String {
    format!(
        "slope {:.3} +- {:.3} (predicted {:.3}, tol {}), bound {}",
        f.slope,
        f.stderr,
        f.predicted,
        f.tol,
        if f.pass_bound { "met" } else { "not met" }
    )
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn laurent() -> Result<Verdict, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_arcsine"))
        .args(["coeffs", "--n", "10"])
        .output()
        .map_err(err)?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let text = String::from_utf8(out.stdout).map_err(err)?;
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let want = [("0", "1", "2"), ("1", "-1", "12"), ("2", "1", "24"), ("3", "-19", "720")];
    let listed = want
        .iter()
        .all(|&(k, p, q)| rows.iter().any(|r| r[..] == [k, p, q]));
    let c = laurent_coeffs(49).map_err(err)?;
    let bad: Vec<i64> = (1..=50)
        .filter(|&n| c.identity_residual(n).map_or(true, |r| r.to_string() != "0"))
        .collect();
    Ok(Verdict {
        pass: listed && rows.len() == 12 && bad.is_empty(),
        detail: format!("{} rows, b_0..b_3 {}, identity exact for n = 1..50: {}", rows.len(), if listed { "match" } else { "differ" }, bad.is_empty()),
        known: None,
    })
}


fn stable_sum() -> ExponentModel {
    ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).expect("valid parameters")
}

fn oracle_triangle() -> Result<Verdict, String> {
    let m = stable_sum();
    let p = InversionParams::for_model(&m);
    let mut worst: f64 = 0.0;
    for &x in &[0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let f = potential_density_fourier(&m, x, &p).map_err(err)?.value;
        let c = potential_density_closed(&m, x).map_err(err)?;
        worst = worst.max(((f - c) / c).abs());
    }
    Ok(Verdict {
        pass: worst <= 1e-5,
        detail: format!("max relative difference {worst:.2e} (limit 1e-5)"),
        known: None,
    })
}

fn laplace() -> Result<Verdict, String> {
    let models = [
        stable_sum(),
        ExponentModel::geometric(0.5).map_err(err)?,
        ExponentModel::stable_plus_geometric(0.5, 0.7).map_err(err)?,
    ];
    let mut worst_excess = f64::NEG_INFINITY;
    for m in &models {
        let p = InversionParams::for_model(m);
        for &l in &[0.5, 1.0, 2.0, 4.0] {
            let c = laplace_check(m, l, 1e3, &p, Method::Auto).map_err(err)?;
            worst_excess = worst_excess.max((c.lhs - c.rhs).abs() - c.tail_bound);
        }
    }
    Ok(Verdict {
        pass: worst_excess <= 1e-4,
        detail: format!("max |lhs - 1/Phi| - tail bound = {worst_excess:.2e} (limit 1e-4)"),
        known: None,
    })
}

/// Model for the expansion fits. With `β - α = 0.8` and no coefficient
/// `1/Γ(α - kd)` near zero for small `k`, the first neglected term dominates
/// the remainder over both fitting windows.
fn expansion_model() -> ExponentModel {
    ExponentModel::stable_sum(3.0, 2.0, 0.1, 0.9).expect("valid parameters")
}

fn expansion_fits(regime: Regime, lo: f64, hi: f64) -> Result<Verdict, String> {
    let m = expansion_model();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 0..3 {
        let series = match regime {
            Regime::LongRange => expansion_series_long(&m, n),
            Regime::ShortRange => expansion_series_short(&m, n),
        }
        .map_err(err)?;
        let pts = log_grid(lo, hi, 9)
            .into_iter()
            .map(|x| Ok((x, (potential_density_closed(&m, x)? - eval_expansion(&series, x)).abs())))
            .collect::<Result<Vec<_>, arcsine_core::Error>>()
            .map_err(err)?;
        let fit = estimate_rate(&pts, series.remainder_exponent, 0.1).map_err(err)?;
        pass &= fit.pass;
        parts.push(format!("n={n}: {:.3} vs {:.3}", fit.slope, fit.predicted));
    }
    Ok(Verdict {
        pass,
        detail: format!("stable-sum(3,2,0.1,0.9), {} (tol 0.1)", parts.join("; ")),
        known: None,
    })
}

fn long_range_expansion() -> Result<Verdict, String> {
    expansion_fits(Regime::LongRange, 20.0, 2000.0)
}

fn short_range_expansion() -> Result<Verdict, String> {
    expansion_fits(Regime::ShortRange, 1e-3, 1e-1)
}

fn undershoot_rate(m: &ExponentModel, predicted: f64, method: Method) -> Result<RateFit, String> {
    let p = InversionParams::for_model(m);
    let pts = log_grid(1e2, 1e4, 5)
        .into_iter()
        .map(|s| Ok((s, sup_error(m, s, 0.2, 0.8, 0, Regime::LongRange, 33, &p, method)?)))
        .collect::<Result<Vec<_>, arcsine_core::Error>>()
        .map_err(err)?;
    estimate_rate(&pts, predicted, 0.15).map_err(err)
}

fn stable_sum_rate() -> Result<Verdict, String> {
    let fit = undershoot_rate(&stable_sum(), -0.4, Method::Auto)?;
    Ok(Verdict {
        pass: fit.pass,
        detail: fit_text(&fit),
        known: None,
    })
}

fn geometric_rate() -> Result<Verdict, String> {
    let alpha = 0.5;
    let m = ExponentModel::geometric(alpha).map_err(err)?;
    let fit = undershoot_rate(&m, -alpha, Method::Inversion)?;
    let doubled = (fit.slope + 2.0 * alpha).abs() <= 0.15;
    Ok(Verdict {
        pass: fit.pass,
        detail: format!("{}; |slope + 2alpha| = {:.3}", fit_text(&fit), (fit.slope + 2.0 * alpha).abs()),
        known: (fit.pass_bound && doubled).then_some(GEOMETRIC_RATE_NOTE),
    })
}

fn mass() -> Result<Verdict, String> {
    let models = [
        stable_sum(),
        ExponentModel::stable_sum(1.0, 2.0, 0.5, 1.0).map_err(err)?,
        ExponentModel::geometric(0.5).map_err(err)?,
        ExponentModel::stable_plus_geometric(0.5, 0.7).map_err(err)?,
    ];
    let mut worst: f64 = 0.0;
    for m in &models {
        let p = InversionParams::for_model(m);
        for &s in &[0.5, 5.0, 50.0] {
            let b = undershoot_mass(m, s, &p, Method::Auto).map_err(err)?;
            worst = worst.max((b.total - 1.0).abs());
        }
    }
    // drift atom: C2 u(s) for the stable sum with beta = 1
    let drift = &models[1];
    let p = InversionParams::for_model(drift);
    let mut atom_ok = true;
    for &s in &[0.5, 5.0, 50.0] {
        let a = atom_at_level(drift, s, &p, Method::Auto).map_err(err)?;
        let bu = 2.0 * potential_density_closed(drift, s).map_err(err)?;
        atom_ok &= a > 0.0 && (a - bu).abs() <= 1e-12 * bu;
    }
    Ok(Verdict {
        pass: worst <= 1e-3 && atom_ok,
        detail: format!("max |mass - 1| = {worst:.2e} (limit 1e-3), drift atom = C2 u(s) > 0: {atom_ok}"),
        known: None,
    })
}

fn monte_carlo() -> Result<Verdict, String> {
    let alpha = 0.5;
    let s = 200.0;
    let m = ExponentModel::geometric(alpha).map_err(err)?;
    let cfg = SimConfig::new(m, s, 100_000, 7).map_err(err)?.with_step(0.05).with_workers(4);
    let set = simulate_undershoot(&cfg).map_err(err)?;
    let ks = set.ks_statistic(|x| beta_cdf(alpha, x).unwrap_or(f64::NAN)).map_err(err)?;
    let mean = set.mean();

    // Samples are keyed by (seed, index): a shorter serial run must reproduce
    // the prefix of the parallel one.
    let prefix = simulate_undershoot(&SimConfig { n_samples: 2_000, workers: 1, ..cfg }).map_err(err)?;
    let deterministic = prefix.values[..] == set.values[..2_000];

    let p = InversionParams::for_model(&m);
    let table = undershoot_cdf_table(&m, s, 129, 1e-12, &p, Method::Auto).map_err(err)?;
    let ks_exact = set.ks_statistic(|x| table.eval(x)).map_err(err)?;
    // mean of the exact law from its tabulated CDF: 1 - ∫ F
    let grid = 4000;
    let integral: f64 = (0..grid)
        .map(|i| {
            let x = (i as f64 + 0.5) / grid as f64;
            table.eval(x)
        })
        .sum::<f64>()
        / grid as f64;
    let exact_mean = table.eval(1.0) - integral;

    let ks_ok = ks <= 0.02;
    let mean_ok = (mean - alpha).abs() <= 0.01;
    Ok(Verdict {
        pass: ks_ok && mean_ok && deterministic,
        detail: format!(
            "KS vs Beta {ks:.4} (limit 0.02), mean {mean:.4} (limit 0.5 +- 0.01), deterministic {deterministic}; \
             exact law at s=200: mean {exact_mean:.4}, KS samples vs exact {ks_exact:.4}"
        ),
        known: (ks_ok && deterministic && !mean_ok && ks_exact <= 0.01 && (mean - exact_mean).abs() <= 0.005)
            .then_some(MC_MEAN_NOTE),
    })
}

fn transforms() -> Result<Verdict, String> {
    let models = [
        stable_sum(),
        ExponentModel::stable_sum(1.0, 1.0, 0.5, 1.0).map_err(err)?,
        ExponentModel::geometric(0.5).map_err(err)?,
        ExponentModel::stable_plus_geometric(0.5, 0.7).map_err(err)?,
    ];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (i, m) in models.iter().enumerate() {
        for &delta in &[0.1, 1.0] {
            for c in transform_check(m, delta, &[0.5, 1.0, 2.0], 1_000_000, 100 + i as u64, 4).map_err(err)? {
                worst = worst.max(c.z_score());
                count += 1;
            }
        }
    }
    Ok(Verdict {
        pass: worst < 4.0,
        detail: format!("{count} checks, max |z| = {worst:.2} (limit 4)"),
        known: None,
    })
}

fn special_functions() -> Result<Verdict, String> {
    let zeros = (0..=20).all(|n| recip_gamma_real(-(n as f64)) == 0.0);
    let mut fact = 1.0f64;
    let mut worst_fact: f64 = 0.0;
    for n in 0..=10 {
        if n > 0 {
            fact *= n as f64;
        }
        worst_fact = worst_fact.max((recip_gamma_real(n as f64 + 1.0) * fact - 1.0).abs());
    }
    let mut worst_refl: f64 = 0.0;
    for i in 1..100 {
        let z = i as f64 / 100.0;
        let want = (PI * z).sin() / PI;
        worst_refl = worst_refl.max((recip_gamma_real(z) * recip_gamma_real(1.0 - z) / want - 1.0).abs());
    }
    let ml = MLParams::new(1.0, 1.0).map_err(err)?;
    let mut worst_exp: f64 = 0.0;
    for i in 0..=140 {
        let x = -30.0 + 0.25 * i as f64;
        worst_exp = worst_exp.max((mittag_leffler(&ml, x).map_err(err)? / x.exp() - 1.0).abs());
    }
    let pass = zeros && worst_fact <= 1e-13 && worst_refl <= 1e-12 && worst_exp <= 1e-10;
    Ok(Verdict {
        pass,
        detail: format!(
            "zeros exact {zeros}, factorial rel {worst_fact:.1e} (1e-13), reflection rel {worst_refl:.1e} (1e-12), \
             E_1,1 vs exp rel {worst_exp:.1e} (1e-10)"
        ),
        known: None,
    })
}
