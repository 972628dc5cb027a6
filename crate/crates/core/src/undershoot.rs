//! The law of the normalized undershoot `X_{T(s)-}/s` of a subordinator at
//! the first passage above level `s`.
//!
//! On `(0,1)` the law has density `s Π((s-sx, ∞)) u(sx)`; a drift `b` adds an
//! atom `b u(s)` at `x = 1` (creeping).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exponent::{ExponentModel, Family};
use crate::potential::{
    expansion_series_long, expansion_series_short, long_range_leading, potential_density, potential_mass,
    InversionParams, Method, Regime,
};
use crate::quad;
use crate::special::{beta_density_raw, laurent_coeffs, recip_gamma_real};

/// Lower cut below which the undershoot mass is taken from `U([0, sε])`.
const NEAR_ZERO: f64 = 1e-9;
const MASS_ABS_TOL: f64 = 1e-10;
const MASS_REL_TOL: f64 = 1e-8;

/// Density and approximation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UndershootEval {
    pub s: f64,
    pub x: f64,
    pub density: f64,
    pub approx_order: usize,
    pub approx_value: f64,
    /// Power of `s` in the neglected remainder of the approximation.
    pub remainder_bound_exponent: f64,
}

/// Total undershoot mass split into its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBalance {
    pub s: f64,
    /// Mass of the density on `(0,1)`.
    pub interior: f64,
    /// `P(X_{T(s)-} = s) = b u(s)`.
    pub atom: f64,
    pub total: f64,
    pub abs_err: f64,
}

fn check_level(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(invalid("s", format!("must be positive and finite, got {s}")))
    }
}

fn check_unit(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(invalid("x", format!("must lie in (0,1), got {x}")))
    }
}

/// Density at `x` with `w = 1 - x` supplied separately, so that points close
/// to 1 keep full relative precision in `s(1-x)`.
fn density_raw(m: &ExponentModel, s: f64, x: f64, w: f64, p: &InversionParams, method: Method) -> Result<f64> {
    let tail = m.levy_tail(s * w)?;
    if tail == 0.0 {
        return Ok(0.0);
    }
    Ok(s * tail * potential_density(m, s * x, p, method)?.value)
}

/// `s Π((s-sx, ∞)) u(sx)`, the density of `X_{T(s)-}/s` on `(0,1)`.
pub fn undershoot_density(m: &ExponentModel, s: f64, x: f64, p: &InversionParams, method: Method) -> Result<f64> {
    check_level(s)?;
    check_unit(x)?;
    density_raw(m, s, x, 1.0 - x, p, method)
}

/// Large-`s` approximation with `n` correction orders.
pub fn undershoot_approx_long(m: &ExponentModel, s: f64, x: f64, n: usize) -> Result<f64> {
    check_level(s)?;
    check_unit(x)?;
    match *m.family() {
        Family::StableSum { c1, c2, alpha, beta } => {
            let d = beta - alpha;
            let r = -c2 / c1;
            let g1a = if alpha > 0.0 { recip_gamma_real(1.0 - alpha) } else { 0.0 };
            let g1b = recip_gamma_real(1.0 - beta);
            let mut v = beta_density_raw(alpha, x);
            for k in 1..=n {
                let kd = k as f64 * d;
                v += r.powi(k as i32) * s.powf(-kd) * x.powf(-1.0 + alpha - kd) * (1.0 - x).powf(-alpha)
                    * recip_gamma_real(alpha - kd)
                    * g1a;
            }
            for k in 0..n {
                let kd = k as f64 * d;
                v -= r.powi(k as i32 + 1) * s.powf(-kd - d) * x.powf(-1.0 + alpha - kd) * (1.0 - x).powf(-beta)
                    * recip_gamma_real(alpha - kd)
                    * g1b;
            }
            Ok(v)
        }
        Family::GeometricStable { alpha } => {
            let mut v = beta_density_raw(alpha, x);
            if n == 0 {
                return Ok(v);
            }
            let b = laurent_coeffs(n as i64 - 1)?;
            for k in -1..n as i64 {
                let bk = b.get_f64(k).expect("coefficient in range");
                let gk = recip_gamma_real(-(k as f64) * alpha);
                for l in 1..=(n as i64 + 1) {
                    if k + l < 1 || k + l > n as i64 {
                        continue;
                    }
                    let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
                    let lf = l as f64;
                    v += sign * bk * s.powf(-((k + l) as f64) * alpha)
                        * x.powf(-1.0 - k as f64 * alpha)
                        * (1.0 - x).powf(-lf * alpha)
                        * gk
                        * recip_gamma_real(1.0 - lf * alpha)
                        / lf;
                }
            }
            Ok(v)
        }
        Family::StablePlusGeometric { .. } => Err(Error::Unsupported(
            "no large-level approximation is available for the stable-plus-geometric family".into(),
        )),
    }
}

/// Small-`s` approximation with `n` correction orders.
pub fn undershoot_approx_short(m: &ExponentModel, s: f64, x: f64, n: usize) -> Result<f64> {
    check_level(s)?;
    check_unit(x)?;
    match *m.family() {
        Family::StableSum { c1, c2, alpha, beta } => {
            let d = beta - alpha;
            let r = -c1 / c2;
            let g1a = if alpha > 0.0 { recip_gamma_real(1.0 - alpha) } else { 0.0 };
            let g1b = recip_gamma_real(1.0 - beta);
            let mut v = beta_density_raw(beta, x);
            for k in 1..=n {
                let kd = k as f64 * d;
                v += r.powi(k as i32) * s.powf(kd) * x.powf(-1.0 + beta + kd) * (1.0 - x).powf(-beta)
                    * recip_gamma_real(beta + kd)
                    * g1b;
            }
            for k in 0..n {
                let kd = k as f64 * d;
                v -= r.powi(k as i32 + 1) * s.powf(kd + d) * x.powf(-1.0 + beta + kd) * (1.0 - x).powf(-alpha)
                    * recip_gamma_real(beta + kd)
                    * g1a;
            }
            Ok(v)
        }
        Family::StablePlusGeometric { beta, .. } => {
            if n != 0 {
                return Err(invalid("n", "only the leading term (n = 0) is available for this family"));
            }
            Ok(beta_density_raw(beta, x))
        }
        Family::GeometricStable { .. } => Err(Error::Unsupported(
            "no small-level approximation is available for the geometric family".into(),
        )),
    }
}

/// The approximation for the given regime.
pub fn undershoot_approx(m: &ExponentModel, s: f64, x: f64, n: usize, regime: Regime) -> Result<f64> {
    match regime {
        Regime::LongRange => undershoot_approx_long(m, s, x, n),
        Regime::ShortRange => undershoot_approx_short(m, s, x, n),
    }
}

/// Power of `s` in the remainder after `n` correction orders.
pub fn remainder_exponent(m: &ExponentModel, n: usize, regime: Regime) -> Result<f64> {
    let k = (n + 1) as f64;
    match (*m.family(), regime) {
        (Family::StableSum { alpha, beta, .. }, Regime::LongRange) => Ok(-k * (beta - alpha)),
        (Family::StableSum { alpha, beta, .. }, Regime::ShortRange) => Ok(k * (beta - alpha)),
        (Family::GeometricStable { alpha }, Regime::LongRange) => Ok(-k * alpha),
        (Family::StablePlusGeometric { beta, .. }, Regime::ShortRange) if n == 0 => Ok(beta),
        (f, _) => Err(Error::Unsupported(format!(
            "no {} approximation of order {n} for the {} family",
            regime_name(regime),
            f.name()
        ))),
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::LongRange => "large-level",
        Regime::ShortRange => "small-level",
    }
}

/// Density, approximation and remainder order at one point.
pub fn undershoot_eval(
    m: &ExponentModel,
    s: f64,
    x: f64,
    n: usize,
    regime: Regime,
    p: &InversionParams,
    method: Method,
) -> Result<UndershootEval> {
    Ok(UndershootEval {
        s,
        x,
        density: undershoot_density(m, s, x, p, method)?,
        approx_order: n,
        approx_value: undershoot_approx(m, s, x, n, regime)?,
        remainder_bound_exponent: remainder_exponent(m, n, regime)?,
    })
}

/// `P(X_{T(s)-} = s) = b u(s)`.
pub fn atom_at_level(m: &ExponentModel, s: f64, p: &InversionParams, method: Method) -> Result<f64> {
    check_level(s)?;
    let b = m.drift();
    if b == 0.0 {
        return Ok(0.0);
    }
    Ok(b * potential_density(m, s, p, method)?.value)
}

/// Power `γ` of the tail singularity `Π((y, ∞)) ~ y^{-γ}` as `y → 0+`
/// (zero for a logarithmic singularity).
fn tail_index_at_zero(m: &ExponentModel) -> f64 {
    let stable = |g: f64| if g > 0.0 && g < 1.0 { g } else { 0.0 };
    match *m.family() {
        Family::StableSum { alpha, beta, .. } => stable(alpha).max(stable(beta)),
        Family::GeometricStable { .. } => 0.0,
        Family::StablePlusGeometric { beta, .. } => stable(beta),
    }
}

/// Mass of the density on `[lo, hi]` with `0 ≤ lo ≤ hi ≤ 1`.
///
/// `[lo, 1/2]` is integrated in `log x` (the potential density may behave
/// like `1/(x log² x)` at zero), `[1/2, hi]` in `t = (1-x)^p` with `p`
/// chosen to cancel the tail singularity. For `lo = 0` the piece `[0, ε]` is
/// `Π((s, ∞)) U([0, sε])` up to the variation of the tail over `[s - sε, s]`.
fn mass_between(m: &ExponentModel, s: f64, lo: f64, hi: f64, p: &InversionParams, method: Method) -> Result<(f64, f64)> {
    let mut failure: Option<Error> = None;
    let mut f = |x: f64, w: f64| match density_raw(m, s, x, w, p, method) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let mut total = 0.0;
    let mut err = 0.0;

    let mid_lo = hi.min(0.5);
    if lo < mid_lo {
        let start = if lo == 0.0 {
            let eps = NEAR_ZERO.min(0.5 * mid_lo);
            let head = potential_mass(m, s * eps, p, method)?;
            let t0 = m.levy_tail(s)?;
            let t1 = m.levy_tail(s * (1.0 - eps))?;
            total += t0 * head;
            err += (t1 - t0).abs() * head;
            eps
        } else {
            lo
        };
        let r = quad::adaptive(
            |t: f64| {
                let x = t.exp();
                f(x, 1.0 - x) * x
            },
            start.ln(),
            mid_lo.ln(),
            MASS_ABS_TOL,
            MASS_REL_TOL,
            400,
        );
        total += r.value;
        err += r.abs_err;
    }

    let mid_hi = lo.max(0.5);
    if mid_hi < hi {
        let pw = (1.0 - tail_index_at_zero(m)).min(0.5);
        let inv = 1.0 / pw;
        let r = quad::adaptive(
            |t: f64| {
                if t <= 0.0 {
                    return 0.0;
                }
                let w = t.powf(inv);
                if w == 0.0 {
                    return 0.0;
                }
                f(1.0 - w, w) * inv * t.powf(inv - 1.0)
            },
            (1.0 - hi).powf(pw),
            (1.0 - mid_hi).powf(pw),
            MASS_ABS_TOL,
            MASS_REL_TOL,
            400,
        );
        total += r.value;
        err += r.abs_err;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((total, err))
}

/// `P(X_{T(s)-}/s ∈ [x_lo, x_hi])` for `0 < x_lo ≤ x_hi < 1`.
pub fn interval_prob(
    m: &ExponentModel,
    s: f64,
    x_lo: f64,
    x_hi: f64,
    p: &InversionParams,
    method: Method,
) -> Result<f64> {
    check_level(s)?;
    check_unit(x_lo)?;
    check_unit(x_hi)?;
    if x_lo > x_hi {
        return Err(invalid("interval", format!("lower end {x_lo} exceeds upper end {x_hi}")));
    }
    if x_lo == x_hi {
        return Ok(0.0);
    }
    Ok(mass_between(m, s, x_lo, x_hi, p, method)?.0)
}

/// `P(X_{T(s)-}/s ≤ x)`; includes the atom at `x = 1`.
pub fn undershoot_cdf(m: &ExponentModel, s: f64, x: f64, p: &InversionParams, method: Method) -> Result<f64> {
    check_level(s)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(undershoot_mass(m, s, p, method)?.total);
    }
    Ok(mass_between(m, s, 0.0, x, p, method)?.0)
}

/// Total mass of the undershoot law, which is one for an unkilled process.
pub fn undershoot_mass(m: &ExponentModel, s: f64, p: &InversionParams, method: Method) -> Result<MassBalance> {
    check_level(s)?;
    let (interior, abs_err) = mass_between(m, s, 0.0, 1.0, p, method)?;
    let atom = atom_at_level(m, s, p, method)?;
    Ok(MassBalance {
        s,
        interior,
        atom,
        total: interior + atom,
        abs_err,
    })
}

/// `Π((x, ∞))` minus its leading power term in the given regime.
///
/// Large levels subtract the term of the long-range index (with the
/// indicator `α > 0` for stable sums), small levels the term of the
/// short-range index `β`.
pub fn eps2(m: &ExponentModel, x: f64, regime: Regime) -> Result<f64> {
    let tail = m.levy_tail(x)?;
    let term = |c: f64, g: f64| {
        if g > 0.0 {
            c * x.powf(-g) * recip_gamma_real(1.0 - g)
        } else {
            0.0
        }
    };
    let leading = match (*m.family(), regime) {
        (Family::StableSum { c1, alpha, .. }, Regime::LongRange) => term(c1, alpha),
        (Family::StableSum { c2, beta, .. }, Regime::ShortRange) => term(c2, beta),
        (Family::StablePlusGeometric { beta, .. }, Regime::ShortRange) => term(1.0, beta),
        (Family::GeometricStable { .. } | Family::StablePlusGeometric { .. }, Regime::LongRange) => {
            let (rho, c0) = long_range_leading(m);
            term(c0, rho)
        }
        (Family::GeometricStable { .. }, Regime::ShortRange) => {
            return Err(Error::Unsupported(
                "the geometric family has no small-level power term".into(),
            ))
        }
    };
    Ok(tail - leading)
}

/// Shape of the density remainder `s Π((s-sx, ∞)) ε₁(sx)`, with `ε₁(y)`
/// modelled by `y^r` (times `|log y|` when the expansion carries a log),
/// `r` being the remainder exponent of the potential expansion.
pub fn eps3_shape(m: &ExponentModel, s: f64, x: f64, n: usize, regime: Regime) -> Result<f64> {
    check_level(s)?;
    check_unit(x)?;
    let series = match regime {
        Regime::LongRange => expansion_series_long(m, n)?,
        Regime::ShortRange => expansion_series_short(m, n)?,
    };
    let y = s * x;
    let mut e1 = y.powf(series.remainder_exponent);
    if series.remainder_has_log {
        e1 *= y.ln().abs();
    }
    Ok(s * m.levy_tail(s * (1.0 - x))? * e1)
}

/// `max_x |density - approx(n)|` over an equispaced grid of `grid_points`
/// points on `[x_lo, x_hi]`.
#[allow(clippy::too_many_arguments)]
pub fn sup_error(
    m: &ExponentModel,
    s: f64,
    x_lo: f64,
    x_hi: f64,
    n: usize,
    regime: Regime,
    grid_points: usize,
    p: &InversionParams,
    method: Method,
) -> Result<f64> {
    check_unit(x_lo)?;
    check_unit(x_hi)?;
    if x_lo >= x_hi {
        return Err(invalid("interval", format!("need x_lo < x_hi, got [{x_lo}, {x_hi}]")));
    }
    if grid_points < 16 {
        return Err(invalid("grid_points", format!("must be at least 16, got {grid_points}")));
    }
    let h = (x_hi - x_lo) / (grid_points - 1) as f64;
    let errs: Result<Vec<f64>> = (0..grid_points)
        .into_par_iter()
        .map(|i| {
            let x = if i + 1 == grid_points { x_hi } else { x_lo + i as f64 * h };
            let d = undershoot_density(m, s, x, p, method)?;
            let a = undershoot_approx(m, s, x, n, regime)?;
            Ok((d - a).abs())
        })
        .collect();
    Ok(errs?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{beta_density, gamma};

    fn params(m: &ExponentModel) -> InversionParams {
        InversionParams::for_model(m)
    }

    #[test]
    fn leading_terms_are_beta_densities() {
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).unwrap();
        for &x in &[0.1, 0.5, 0.9] {
            assert_eq!(undershoot_approx_long(&m, 50.0, x, 0).unwrap(), beta_density(0.3, x).unwrap());
            assert_eq!(undershoot_approx_short(&m, 0.01, x, 0).unwrap(), beta_density(0.7, x).unwrap());
        }
        let g = ExponentModel::geometric(0.5).unwrap();
        let v = undershoot_approx_long(&g, 100.0, 0.5, 0).unwrap();
        assert!((v - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn first_corrections_by_hand() {
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).unwrap();
        let (s, x) = (100.0f64, 0.5f64);
        let want = beta_density(0.3, x).unwrap()
            - s.powf(-0.4) * x.powf(-1.1) * (1.0 - x).powf(-0.3) / (gamma(-0.1) * gamma(0.7))
            + s.powf(-0.4) * x.powf(-0.7) * (1.0 - x).powf(-0.7) / (gamma(0.3) * gamma(0.3));
        let got = undershoot_approx_long(&m, s, x, 1).unwrap();
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");

        let s = 0.01f64;
        let want = beta_density(0.7, x).unwrap()
            - s.powf(0.4) * x.powf(0.1) * (1.0 - x).powf(-0.7) / (gamma(1.1) * gamma(0.3))
            + s.powf(0.4) * x.powf(-0.3) * (1.0 - x).powf(-0.3) / (gamma(0.7) * gamma(0.7));
        let got = undershoot_approx_short(&m, s, x, 1).unwrap();
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn family_restrictions() {
        let g = ExponentModel::geometric(0.5).unwrap();
        assert!(undershoot_approx_short(&g, 0.1, 0.5, 0).is_err());
        let spg = ExponentModel::stable_plus_geometric(0.5, 0.5).unwrap();
        assert!(undershoot_approx_long(&spg, 10.0, 0.5, 0).is_err());
        assert!(undershoot_approx_short(&spg, 0.1, 0.5, 1).is_err());
        assert!(undershoot_approx_short(&spg, 0.1, 0.5, 0).is_ok());
    }

    #[test]
    fn rejects_points_outside_unit_interval() {
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).unwrap();
        let p = params(&m);
        for &x in &[0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(undershoot_density(&m, 10.0, x, &p, Method::Auto).is_err());
        }
        assert!(undershoot_density(&m, 0.0, 0.5, &p, Method::Auto).is_err());
        assert!(interval_prob(&m, 10.0, 0.6, 0.4, &p, Method::Auto).is_err());
        assert_eq!(interval_prob(&m, 10.0, 0.4, 0.4, &p, Method::Auto).unwrap(), 0.0);
    }

    #[test]
    fn atoms() {
        let g = ExponentModel::geometric(0.5).unwrap();
        assert_eq!(atom_at_level(&g, 3.0, &params(&g), Method::Auto).unwrap(), 0.0);
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.5, 0.8).unwrap();
        assert_eq!(atom_at_level(&m, 3.0, &params(&m), Method::Auto).unwrap(), 0.0);
        let d = ExponentModel::stable_sum(1.0, 1.0, 0.5, 1.0).unwrap();
        let a = atom_at_level(&d, 1.0, &params(&d), Method::Auto).unwrap();
        assert!((a - 0.427_583_576_155_807).abs() < 1e-12, "{a}");
    }

    #[test]
    fn eps2_values() {
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).unwrap();
        let x = 3.0f64;
        let e = eps2(&m, x, Regime::LongRange).unwrap();
        assert!((e - x.powf(-0.7) / gamma(0.3)).abs() < 1e-15);
        let e = eps2(&m, x, Regime::ShortRange).unwrap();
        assert!((e - x.powf(-0.3) / gamma(0.7)).abs() < 1e-15);
        let d = ExponentModel::stable_sum(1.0, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(eps2(&d, x, Regime::LongRange).unwrap(), 0.0);
        let g = ExponentModel::geometric(0.4).unwrap();
        let x = 1e4f64;
        let e = eps2(&g, x, Regime::LongRange).unwrap();
        let l2 = -x.powf(-0.8) / (2.0 * gamma(1.0 - 0.8));
        assert!((e - l2).abs() < 0.03 * l2.abs(), "{e} vs {l2}");
        let l3 = x.powf(-1.2) / (3.0 * gamma(1.0 - 1.2));
        assert!((e - l2 - l3).abs() < 1e-3 * l2.abs(), "{e} vs {}", l2 + l3);
        assert!(eps2(&g, x, Regime::ShortRange).is_err());
    }

    #[test]
    fn remainder_exponents() {
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).unwrap();
        assert!((remainder_exponent(&m, 1, Regime::LongRange).unwrap() + 0.8).abs() < 1e-15);
        assert!((remainder_exponent(&m, 0, Regime::ShortRange).unwrap() - 0.4).abs() < 1e-15);
        let g = ExponentModel::geometric(0.5).unwrap();
        assert!((remainder_exponent(&g, 0, Regime::LongRange).unwrap() + 0.5).abs() < 1e-15);
        assert!(remainder_exponent(&g, 0, Regime::ShortRange).is_err());
    }

    #[test]
    fn near_stable_density_is_arcsine() {
        let m = ExponentModel::stable_sum(1.0, 1e-6, 0.5, 1.0).unwrap();
        let d = undershoot_density(&m, 10.0, 0.5, &params(&m), Method::Auto).unwrap();
        assert!((d - 2.0 / std::f64::consts::PI).abs() < 1e-2, "{d}");
    }

    #[test]
    fn stable_sum_mass_is_one() {
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).unwrap();
        let b = undershoot_mass(&m, 5.0, &params(&m), Method::Auto).unwrap();
        assert!((b.total - 1.0).abs() < 1e-6, "{b:?}");
        let d = ExponentModel::stable_sum(1.0, 1.0, 0.5, 1.0).unwrap();
        let b = undershoot_mass(&d, 5.0, &params(&d), Method::Auto).unwrap();
        assert!(b.atom > 0.0);
        assert!((b.total - 1.0).abs() < 1e-6, "{b:?}");
    }
}
