//! Laurent coefficients of `1/log(1+z)` around `z = 0`.
//!
//! `1/log(1+z) = Σ_{k≥-1} b_k z^k` with `b_{-1} = 1`. Multiplying by
//! `log(1+z) = Σ_{j≥1} (-1)^{j-1} z^j / j` and matching powers gives, for
//! every `n ≥ 1`, `Σ_{k=-1}^{n-1} (-1)^{n-k-1} b_k / (n-k) = 0`, which fixes
//! `b_{n-1}`. The recursion is unstable in floating point, so the values are
//! kept as exact rationals.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentCoeffs {
    /// `coeffs[i]` is `b_{i-1}`.
    coeffs: Vec<BigRational>,
}

/// One coefficient in printable form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LaurentEntry {
    pub k: i64,
    pub numerator: String,
    pub denominator: String,
}

impl LaurentCoeffs {
    /// Highest index `n` stored (so `b_{-1}..b_n` are available).
    pub fn max_index(&self) -> i64 {
        self.coeffs.len() as i64 - 2
    }

    /// `b_k` for `-1 <= k <= max_index()`.
    pub fn get(&self, k: i64) -> Option<&BigRational> {
        if k < -1 {
            return None;
        }
        self.coeffs.get((k + 1) as usize)
    }

    /// `b_k` as a double.
    pub fn get_f64(&self, k: i64) -> Option<f64> {
        self.get(k).map(rational_to_f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.coeffs.iter().enumerate().map(|(i, b)| (i as i64 - 1, b))
    }

    pub fn entries(&self) -> Vec<LaurentEntry> {
        self.iter()
            .map(|(k, b)| LaurentEntry {
                k,
                numerator: b.numer().to_string(),
                denominator: b.denom().to_string(),
            })
            .collect()
    }

    /// Left side of the defining identity for order `n >= 1`; exactly zero
    /// when `b_{-1}..b_{n-1}` are correct.
    pub fn identity_residual(&self, n: i64) -> Option<BigRational> {
        if n < 1 || n - 1 > self.max_index() {
            return None;
        }
        Some(identity_sum(&self.coeffs, n, true))
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `Σ_{k=-1}^{n-1} (-1)^{n-k-1} b_k/(n-k)`, optionally skipping `k = n-1`.
fn identity_sum(b: &[BigRational], n: i64, include_last: bool) -> BigRational {
    let last = if include_last { n - 1 } else { n - 2 };
    let mut acc = BigRational::zero();
    for k in -1..=last {
        let term = &b[(k + 1) as usize] / BigRational::from_integer(BigInt::from(n - k));
        if (n - k - 1) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Exact `b_{-1}, b_0, …, b_n`.
pub fn laurent_coeffs(n: i64) -> Result<LaurentCoeffs> {
    if n < -1 {
        return Err(invalid("n", format!("must be at least -1, got {n}")));
    }
    let mut b = vec![BigRational::one()];
    for m in 1..=n + 1 {
        // The k = m-1 term has sign +1 and weight 1.
        let rest = identity_sum(&b, m, false);
        b.push(-rest);
    }
    Ok(LaurentCoeffs { coeffs: b })
}
