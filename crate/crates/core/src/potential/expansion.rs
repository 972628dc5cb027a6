//! Power-type expansions of the potential density at infinity (long range)
//! and at zero (short range).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exponent::{ExponentModel, Family, N_MAX};
use crate::special::{laurent_coeffs, recip_gamma_real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LongRange,
    ShortRange,
}

/// `Σ coef · x^expo` plus the order of the neglected remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSeries {
    /// `(coef, expo)` pairs in correction order; zero coefficients stay in
    /// place so that indices line up with the correction order.
    pub terms: Vec<(f64, f64)>,
    pub remainder_exponent: f64,
    /// The remainder carries an extra `|log x|` factor.
    pub remainder_has_log: bool,
    pub regime: Regime,
}

/// Largest `n` for which the geometric long-range expansion is covered:
/// the inversion order must satisfy `N > 1 + nα` with `N ≤ N_MAX`.
pub fn geometric_max_order(alpha: f64) -> usize {
    let mut n = 0;
    while 1.0 + (n + 1) as f64 * alpha < N_MAX as f64 {
        n += 1;
    }
    n
}

/// Expansion of `u(x)` as `x → ∞` with `n` correction terms.
pub fn expansion_series_long(m: &ExponentModel, n: usize) -> Result<ExpansionSeries> {
    match *m.family() {
        Family::StableSum { c1, c2, alpha, beta } => {
            let d = beta - alpha;
            let r = -c2 / c1;
            let terms = (0..=n)
                .map(|k| {
                    let a_k = alpha - k as f64 * d;
                    (r.powi(k as i32) / c1 * recip_gamma_real(a_k), -1.0 + a_k)
                })
                .collect();
            Ok(ExpansionSeries {
                terms,
                remainder_exponent: -1.0 + alpha - (n + 1) as f64 * d,
                remainder_has_log: false,
                regime: Regime::LongRange,
            })
        }
        Family::GeometricStable { alpha } => {
            let max = geometric_max_order(alpha);
            if n > max {
                return Err(invalid(
                    "n",
                    format!("geometric expansion supports at most {max} terms for alpha = {alpha}"),
                ));
            }
            let b = laurent_coeffs(n as i64 - 1)?;
            let terms = (-1..n as i64)
                .map(|k| {
                    let bk = b.get_f64(k).expect("coefficient in range");
                    (bk * recip_gamma_real(-(k as f64) * alpha), -1.0 - k as f64 * alpha)
                })
                .collect();
            Ok(ExpansionSeries {
                terms,
                remainder_exponent: -1.0 - n as f64 * alpha,
                remainder_has_log: false,
                regime: Regime::LongRange,
            })
        }
        Family::StablePlusGeometric { .. } => Err(Error::Unsupported(
            "no long-range expansion is available for the stable-plus-geometric family".into(),
        )),
    }
}

/// Expansion of `u(x)` as `x → 0+` with `n` correction terms.
pub fn expansion_series_short(m: &ExponentModel, n: usize) -> Result<ExpansionSeries> {
    match *m.family() {
        Family::StableSum { c1, c2, alpha, beta } => {
            let d = beta - alpha;
            let r = -c1 / c2;
            let terms = (0..=n)
                .map(|k| {
                    let b_k = beta + k as f64 * d;
                    (r.powi(k as i32) / c2 * recip_gamma_real(b_k), -1.0 + b_k)
                })
                .collect();
            Ok(ExpansionSeries {
                terms,
                remainder_exponent: -1.0 + beta + (n + 1) as f64 * d,
                remainder_has_log: false,
                regime: Regime::ShortRange,
            })
        }
        Family::StablePlusGeometric { beta, .. } => {
            if n != 0 {
                return Err(invalid("n", "only the leading term (n = 0) is available for this family"));
            }
            Ok(ExpansionSeries {
                terms: vec![(recip_gamma_real(beta), -1.0 + beta)],
                remainder_exponent: -1.0 + 2.0 * beta,
                remainder_has_log: true,
                regime: Regime::ShortRange,
            })
        }
        Family::GeometricStable { .. } => Err(Error::Unsupported(
            "no short-range expansion is available for the geometric family".into(),
        )),
    }
}

/// `Σ coef · x^expo`, summed from the largest term down.
pub fn eval_expansion(s: &ExpansionSeries, x: f64) -> f64 {
    let mut terms: Vec<f64> = s
        .terms
        .iter()
        .filter(|(c, _)| *c != 0.0)
        .map(|&(c, e)| c * x.powf(e))
        .collect();
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    terms.iter().sum()
}
