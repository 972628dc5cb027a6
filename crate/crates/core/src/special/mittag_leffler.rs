//! Two-parameter Mittag-Leffler function `E_{a,b}(x) = Σ x^k / Γ(ka + b)` on
//! the real line, aimed at the negative axis.
//!
//! Evaluation tries, in order: the power series in double precision (accepted
//! when its rounding error bound meets the tolerance), the large-argument
//! asymptotic expansion beyond `switch_radius`, a real integral
//! representation (for `0 < a < 1`, `b < 1 + a`), the series in double-double
//! arithmetic, and finally the asymptotic expansion at any radius.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::dd::DoubleDouble;
use super::gamma::{ln_gamma, recip_gamma_real, sinpi};
use crate::error::{invalid, Error, Result};
use crate::quad;

/// Maximum number of terms used by the asymptotic expansion.
pub const MAX_ASYMPTOTIC_TERMS: usize = 20;
const MAX_SERIES_TERMS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    Extended,
}

/// Parameters of `E_{a,b}` and its evaluation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLParams {
    pub a: f64,
    pub b: f64,
    pub switch_radius: f64,
    pub precision: Precision,
    /// Relative tolerance every route must certify.
    pub tol: f64,
}

impl MLParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(invalid("a", format!("must be positive and finite, got {a}")));
        }
        if !b.is_finite() {
            return Err(invalid("b", format!("must be finite, got {b}")));
        }
        Ok(Self {
            a,
            b,
            switch_radius: 30.0,
            precision: Precision::Extended,
            tol: 1e-12,
        })
    }

    pub fn with_switch_radius(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(invalid("switch_radius", format!("must be positive, got {r}")));
        }
        self.switch_radius = r;
        Ok(self)
    }

    pub fn with_precision(mut self, p: Precision) -> Self {
        self.precision = p;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(invalid("tol", format!("must be positive, got {tol}")));
        }
        self.tol = tol;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) {
            return Err(invalid("a", format!("must be positive, got {}", self.a)));
        }
        if !(self.switch_radius > 0.0) {
            return Err(invalid("switch_radius", "must be positive"));
        }
        Ok(())
    }
}

/// A value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

impl Estimate {
    fn meets(&self, tol: f64) -> bool {
        self.value.is_finite() && self.abs_err <= tol * self.value.abs()
    }
}

/// `E_{a,b}(x)`.
pub fn mittag_leffler(p: &MLParams, x: f64) -> Result<f64> {
    p.validate()?;
    if x.is_nan() {
        return Ok(f64::NAN);
    }
    if x == 0.0 {
        return Ok(recip_gamma_real(p.b));
    }
    if p.a == 1.0 && p.b == 1.0 {
        return Ok(x.exp());
    }
    let mut best: Option<Estimate> = None;
    let mut keep = |e: Estimate| {
        if e.value.is_finite() && best.map_or(true, |b: Estimate| e.abs_err < b.abs_err) {
            best = Some(e);
        }
    };

    let far = x < 0.0 && -x > p.switch_radius && p.a < 2.0;
    if !far {
        if let Some(e) = series_double(p.a, p.b, x) {
            if e.meets(p.tol) {
                return Ok(e.value);
            }
            keep(e);
        }
    }
    if x < 0.0 && p.a < 2.0 {
        let e = asymptotic_optimal(p.a, p.b, -x);
        if far && e.meets(p.tol) {
            return Ok(e.value);
        }
        keep(e);
    }
    if x < 0.0 && p.a < 1.0 && p.b < 1.0 + p.a {
        if let Some(e) = integral_representation(p.a, p.b, -x, p.tol) {
            if e.meets(p.tol) {
                return Ok(e.value);
            }
            keep(e);
        }
    }
    if p.precision == Precision::Extended {
        if let Some(e) = series_extended(p.a, p.b, x) {
            if e.meets(p.tol) {
                return Ok(e.value);
            }
            keep(e);
        }
    }
    if far {
        if let Some(e) = series_double(p.a, p.b, x) {
            if e.meets(p.tol) {
                return Ok(e.value);
            }
        }
    }
    match best {
        Some(e) => Err(Error::NonConvergence {
            what: "Mittag-Leffler evaluation",
            estimate: e.abs_err / e.value.abs().max(f64::MIN_POSITIVE),
            requested: p.tol,
        }),
        None => Err(Error::NonConvergence {
            what: "Mittag-Leffler evaluation",
            estimate: f64::INFINITY,
            requested: p.tol,
        }),
    }
}

/// The truncated asymptotic sum `Σ_{k=1}^{n+1} (-1)^{k-1} x^{-k} / Γ(b - ka)`,
/// approximating `E_{a,b}(-x)` for large `x > 0`.
pub fn ml_asymptotic(p: &MLParams, x: f64, n: usize) -> Result<f64> {
    if !(p.a > 0.0 && p.a < 2.0) {
        return Err(invalid("a", format!("asymptotic expansion needs 0 < a < 2, got {}", p.a)));
    }
    if !(x > 0.0) {
        return Err(invalid("x", format!("must be positive, got {x}")));
    }
    let mut sum = 0.0;
    let mut xk = 1.0;
    for k in 1..=n + 1 {
        xk /= x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * xk * recip_gamma_real(p.b - k as f64 * p.a);
    }
    Ok(sum)
}

/// Asymptotic expansion of `E_{a,b}(-x)` with optimal truncation.
///
/// Terms are added while their magnitudes decrease (zero terms from
/// reciprocal-gamma poles are skipped for that test), up to
/// [`MAX_ASYMPTOTIC_TERMS`]. The error estimate is the first omitted nonzero
/// term.
pub fn asymptotic_optimal(a: f64, b: f64, x: f64) -> Estimate {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut xk = 1.0;
    let mut err = f64::INFINITY;
    for k in 1..=MAX_ASYMPTOTIC_TERMS + 1 {
        xk /= x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let t = sign * xk * recip_gamma_real(b - k as f64 * a);
        if t == 0.0 {
            continue;
        }
        if t.abs() >= prev || k == MAX_ASYMPTOTIC_TERMS + 1 {
            err = t.abs();
            break;
        }
        sum += t;
        prev = t.abs();
    }
    Estimate {
        value: sum,
        abs_err: err,
    }
}

/// The k-th series term `x^k / Γ(ka + b)`.
fn series_term(a: f64, b: f64, x: f64, k: usize) -> f64 {
    let arg = k as f64 * a + b;
    let sign = if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
    if arg <= 140.0 {
        sign * x.abs().powi(k as i32) * recip_gamma_real(arg)
    } else {
        let r = recip_gamma_real(arg).signum();
        sign * r * (k as f64 * x.abs().ln() - ln_gamma(arg)).exp()
    }
}

/// Natural log of the largest term magnitude and the number of terms needed,
/// or `None` if the series is hopeless (too many terms or overflow).
fn series_plan(a: f64, b: f64, x: f64) -> Option<(f64, usize)> {
    let lx = x.abs().ln();
    let mut max_log = f64::NEG_INFINITY;
    for k in 0..MAX_SERIES_TERMS {
        let arg = k as f64 * a + b;
        let l = k as f64 * lx - ln_gamma(arg);
        if l.is_finite() {
            max_log = max_log.max(l);
        }
        // Terms are past their peak and negligible.
        if arg > 2.0 && l < max_log - 40.0 && l < -40.0 {
            return if max_log > 700.0 { None } else { Some((max_log, k + 1)) };
        }
    }
    None
}

fn series_double(a: f64, b: f64, x: f64) -> Option<Estimate> {
    let (_, n) = series_plan(a, b, x)?;
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut abs_sum = 0.0;
    for k in 0..n {
        let t = series_term(a, b, x, k);
        // Kahan-Babuska summation.
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
        abs_sum += t.abs();
    }
    let value = sum + comp;
    Some(Estimate {
        value,
        abs_err: 4.0 * f64::EPSILON * abs_sum + f64::MIN_POSITIVE,
    })
}

fn series_extended(a: f64, b: f64, x: f64) -> Option<Estimate> {
    let (_, n) = series_plan(a, b, x)?;
    let mut sum = DoubleDouble::ZERO;
    let mut abs_sum = 0.0;
    let integer_a = a.fract() == 0.0 && a <= 8.0;
    if integer_a && b > 0.0 {
        // Exact ratio recurrence: t_k = t_{k-1} x / ((k-1)a + b)_a.
        let ia = a as usize;
        let mut t = DoubleDouble::new(1.0);
        for k in 0..n {
            if k > 0 {
                t = t * x;
                let base = (k - 1) as f64 * a + b;
                for j in 0..ia {
                    t = t.div_f64(base + j as f64);
                }
            }
            sum = sum + t;
            abs_sum += t.to_f64().abs();
        }
        let scale = recip_gamma_real(b);
        return Some(Estimate {
            value: sum.to_f64() * scale,
            abs_err: (16.0 * DoubleDouble::EPSILON * abs_sum + 2.0 * f64::EPSILON * sum.to_f64().abs())
                * scale.abs(),
        });
    }
    for k in 0..n {
        let t = series_term(a, b, x, k);
        sum = sum + DoubleDouble::new(t);
        abs_sum += t.abs();
    }
    Some(Estimate {
        value: sum.to_f64(),
        abs_err: 2.0 * f64::EPSILON * abs_sum,
    })
}

/// `E_{a,b}(-x)` for `x > 0`, `0 < a < 1`, `b < 1 + a` from
/// `(1/π) ∫_0^∞ e^{-r} r^{a-b} (r^a sin πb + x sin π(b-a)) / (r^{2a} + 2x r^a cos πa + x²) dr`,
/// integrated in `v = ln r`.
fn integral_representation(a: f64, b: f64, x: f64, tol: f64) -> Option<Estimate> {
    let c = 1.0 + a - b;
    let s_b = sinpi(b);
    let s_ba = sinpi(b - a);
    let cos_a = (PI * a).cos();
    let f = |v: f64| {
        let r = v.exp();
        let ra = (a * v).exp();
        let num = ra * s_b + x * s_ba;
        let den = ra * ra + 2.0 * x * ra * cos_a + x * x;
        (-r).exp() * (c * v).exp() * num / den
    };
    let lo = (1e-18f64).ln() / c + (x * x).ln().min(0.0) / c;
    let hi = 60f64.ln();
    // Split at the peak of the rational factor, where r^a is near x.
    let v_peak = (x.ln() / a).clamp(lo + 1.0, hi - 0.5);
    let eps = tol * 0.05;
    let r1 = quad::adaptive(f, lo, v_peak, 1e-300, eps, 2000);
    let r2 = quad::adaptive(f, v_peak, hi, 1e-300, eps, 2000);
    let value = (r1.value + r2.value) / PI;
    // Lower-limit truncation: for r < 1 the integrand is at most
    // e^{cv} (1 + x) / (x sin πa)^2.
    let trunc = (c * lo).exp() * (1.0 + x) / (x * sinpi(a)).powi(2) / c / PI;
    Some(Estimate {
        value,
        abs_err: (r1.abs_err + r2.abs_err) / PI + trunc + 4.0 * f64::EPSILON * value.abs(),
    })
}
