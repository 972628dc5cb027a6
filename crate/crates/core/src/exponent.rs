//! Laplace exponents of the supported subordinator families.
//!
//! * `StableSum`: `Φ(z) = C1 z^α + C2 z^β`, `0 ≤ α < β ≤ 1`.
//! * `GeometricStable`: `Φ(z) = log(1 + z^α)`, `0 < α ≤ 1`.
//! * `StablePlusGeometric`: `Φ(z) = z^β + log(1 + z^α)`, `0 < α, β ≤ 1`.
//!
//! Besides `Φ` the model provides its derivatives, the derivatives of `1/Φ`
//! and the Lévy tail `Π((x, ∞))`.

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad;
use crate::special::{expint_e1, mittag_leffler, recip_gamma_real, MLParams, MAX_ASYMPTOTIC_TERMS};

/// Largest derivative order supported by [`ExponentModel::phi_derivatives`].
pub const N_MAX: usize = 12;

/// Beyond `u = x^α` above this value the geometric tail uses its asymptotic
/// expansion instead of quadrature.
const GEOMETRIC_TAIL_SPLIT: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    StableSum { c1: f64, c2: f64, alpha: f64, beta: f64 },
    #[serde(rename = "geometric")]
    GeometricStable { alpha: f64 },
    StablePlusGeometric { alpha: f64, beta: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::StableSum { .. } => "stable-sum",
            Family::GeometricStable { .. } => "geometric",
            Family::StablePlusGeometric { .. } => "stable-plus-geometric",
        }
    }
}

/// A subordinator family together with its killing rate and drift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentModel {
    family: Family,
    killing_rate: f64,
    drift: f64,
}

fn check_unit(name: &'static str, v: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { (0.0..=1.0).contains(&v) } else { v > 0.0 && v <= 1.0 };
    if ok {
        Ok(())
    } else {
        let range = if allow_zero { "[0,1]" } else { "(0,1]" };
        Err(invalid(name, format!("must lie in {range}, got {v}")))
    }
}

/// `z^γ` and its derivatives `γ(γ-1)…(γ-j+1) z^{γ-j}` for `j = 0..=n`.
fn power_derivatives(z: Complex64, gamma: f64, n: usize, out: &mut [Complex64]) {
    let lnz = z.ln();
    let mut falling = 1.0;
    for (j, o) in out.iter_mut().enumerate().take(n + 1) {
        if j > 0 {
            falling *= gamma - (j - 1) as f64;
        }
        *o = if falling == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            falling * ((gamma - j as f64) * lnz).exp()
        };
    }
}

/// Derivatives of `h = log(1 + z^α)` for `j = 0..=n`, from `p h' = p'` with
/// `p = 1 + z^α` differentiated by Leibniz' rule.
fn log_power_derivatives(z: Complex64, alpha: f64, n: usize) -> Vec<Complex64> {
    let mut p = vec![Complex64::new(0.0, 0.0); n + 2];
    power_derivatives(z, alpha, n + 1, &mut p);
    p[0] += 1.0;
    let mut h = vec![Complex64::new(0.0, 0.0); n + 1];
    h[0] = p[0].ln();
    for m in 0..n {
        // Σ_{i=0}^{m} C(m,i) p^{(i)} h^{(m+1-i)} = p^{(m+1)}
        let mut acc = p[m + 1];
        let mut binom = 1.0;
        for i in 1..=m {
            binom = binom * (m + 1 - i) as f64 / i as f64;
            acc -= binom * p[i] * h[m + 1 - i];
        }
        h[m + 1] = acc / p[0];
    }
    h
}

impl ExponentModel {
    /// `Φ(z) = C1 z^α + C2 z^β` with `C1, C2 > 0` and `0 ≤ α < β ≤ 1`.
    ///
    /// For `α = 0` the constant `C1` is a killing rate; for `β = 1` the term
    /// `C2 z` is a drift.
    pub fn stable_sum(c1: f64, c2: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(invalid("c1", format!("must be positive, got {c1}")));
        }
        if !(c2 > 0.0 && c2.is_finite()) {
            return Err(invalid("c2", format!("must be positive, got {c2}")));
        }
        check_unit("alpha", alpha, true)?;
        check_unit("beta", beta, false)?;
        if alpha >= beta {
            return Err(invalid("alpha", format!("must be smaller than beta ({alpha} >= {beta})")));
        }
        Ok(Self {
            family: Family::StableSum { c1, c2, alpha, beta },
            killing_rate: if alpha == 0.0 { c1 } else { 0.0 },
            drift: if beta == 1.0 { c2 } else { 0.0 },
        })
    }

    /// `Φ(z) = log(1 + z^α)`, `0 < α ≤ 1` (`α = 1` is the gamma subordinator).
    pub fn geometric(alpha: f64) -> Result<Self> {
        check_unit("alpha", alpha, false)?;
        Ok(Self {
            family: Family::GeometricStable { alpha },
            killing_rate: 0.0,
            drift: 0.0,
        })
    }

    /// `Φ(z) = z^β + log(1 + z^α)`, `0 < α, β ≤ 1`.
    pub fn stable_plus_geometric(alpha: f64, beta: f64) -> Result<Self> {
        check_unit("alpha", alpha, false)?;
        check_unit("beta", beta, false)?;
        Ok(Self {
            family: Family::StablePlusGeometric { alpha, beta },
            killing_rate: 0.0,
            drift: if beta == 1.0 { 1.0 } else { 0.0 },
        })
    }

    pub fn from_family(family: Family) -> Result<Self> {
        match family {
            Family::StableSum { c1, c2, alpha, beta } => Self::stable_sum(c1, c2, alpha, beta),
            Family::GeometricStable { alpha } => Self::geometric(alpha),
            Family::StablePlusGeometric { alpha, beta } => Self::stable_plus_geometric(alpha, beta),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Killing rate `a = Φ(0+)`.
    pub fn killing_rate(&self) -> f64 {
        self.killing_rate
    }

    /// Drift `b = lim Φ(λ)/λ`.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    fn check_z(z: Complex64) -> Result<()> {
        if z.re > 0.0 && z.im.is_finite() {
            Ok(())
        } else {
            Err(invalid("z", format!("requires Re z > 0, got {z}")))
        }
    }

    /// `Φ(z)` on the right half-plane (principal branches).
    pub fn phi(&self, z: Complex64) -> Result<Complex64> {
        Self::check_z(z)?;
        Ok(self.phi_unchecked(z))
    }

    pub(crate) fn phi_unchecked(&self, z: Complex64) -> Complex64 {
        let pow = |g: f64| {
            if g == 0.0 {
                Complex64::new(1.0, 0.0)
            } else if g == 1.0 {
                z
            } else {
                (g * z.ln()).exp()
            }
        };
        match self.family {
            Family::StableSum { c1, c2, alpha, beta } => c1 * pow(alpha) + c2 * pow(beta),
            Family::GeometricStable { alpha } => (1.0 + pow(alpha)).ln(),
            Family::StablePlusGeometric { alpha, beta } => pow(beta) + (1.0 + pow(alpha)).ln(),
        }
    }

    /// `Φ(λ)` for real `λ > 0`.
    pub fn phi_real(&self, lambda: f64) -> f64 {
        match self.family {
            Family::StableSum { c1, c2, alpha, beta } => c1 * lambda.powf(alpha) + c2 * lambda.powf(beta),
            Family::GeometricStable { alpha } => lambda.powf(alpha).ln_1p(),
            Family::StablePlusGeometric { alpha, beta } => lambda.powf(beta) + lambda.powf(alpha).ln_1p(),
        }
    }

    /// Solves `Φ(λ) = y` for `λ > 0`; `y` must exceed `Φ(0+)`.
    pub fn phi_inverse(&self, y: f64) -> Result<f64> {
        if !(y > self.killing_rate) || !y.is_finite() {
            return Err(invalid("y", format!("must exceed Φ(0+) = {}, got {y}", self.killing_rate)));
        }
        // Bisection in log λ; Φ is increasing.
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while self.phi_real(lo.exp()) > y {
            lo *= 2.0;
            if lo < -1e4 {
                return Ok(0.0);
            }
        }
        while self.phi_real(hi.exp()) < y {
            hi *= 2.0;
            if hi > 1e4 {
                return Ok(f64::INFINITY);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.phi_real(mid.exp()) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }

    /// `[Φ(z), Φ'(z), …, Φ^{(n)}(z)]`.
    pub fn phi_derivatives(&self, z: Complex64, n: usize) -> Result<Vec<Complex64>> {
        Self::check_z(z)?;
        if n > N_MAX {
            return Err(invalid("N", format!("derivative order {n} exceeds the maximum {N_MAX}")));
        }
        Ok(self.phi_derivatives_unchecked(z, n))
    }

    pub(crate) fn phi_derivatives_unchecked(&self, z: Complex64, n: usize) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; n + 1];
        match self.family {
            Family::StableSum { c1, c2, alpha, beta } => {
                let mut a = vec![zero; n + 1];
                let mut b = vec![zero; n + 1];
                power_derivatives(z, alpha, n, &mut a);
                power_derivatives(z, beta, n, &mut b);
                for j in 0..=n {
                    out[j] = c1 * a[j] + c2 * b[j];
                }
            }
            Family::GeometricStable { alpha } => {
                out = log_power_derivatives(z, alpha, n);
            }
            Family::StablePlusGeometric { alpha, beta } => {
                let h = log_power_derivatives(z, alpha, n);
                power_derivatives(z, beta, n, &mut out);
                for j in 0..=n {
                    out[j] += h[j];
                }
            }
        }
        out
    }

    /// `[g, g', …, g^{(n)}]` for `g = 1/Φ`, via the Leibniz recurrence
    /// `g^{(m)} = -(1/Φ) Σ_{j=1}^{m} C(m,j) Φ^{(j)} g^{(m-j)}`.
    pub fn recip_phi_derivatives(&self, z: Complex64, n: usize) -> Result<Vec<Complex64>> {
        let phi = self.phi_derivatives(z, n)?;
        Ok(recip_derivatives(&phi))
    }

    /// `(d/dz)^n (1/Φ)(z)`.
    pub fn recip_phi_derivative(&self, z: Complex64, n: usize) -> Result<Complex64> {
        Ok(self.recip_phi_derivatives(z, n)?[n])
    }

    /// Lévy tail `Π((x, ∞))`.
    pub fn levy_tail(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(invalid("x", format!("must be positive, got {x}")));
        }
        match self.family {
            Family::StableSum { c1, c2, alpha, beta } => Ok(stable_tail(c1, alpha, x) + stable_tail(c2, beta, x)),
            Family::GeometricStable { alpha } => geometric_tail(alpha, x),
            Family::StablePlusGeometric { alpha, beta } => Ok(stable_tail(1.0, beta, x) + geometric_tail(alpha, x)?),
        }
    }

    /// The truncated large-`x` expansion of the geometric tail,
    /// `Σ_{ℓ=1}^{n+1} (-1)^{ℓ-1} x^{-ℓα} / (ℓ Γ(1-ℓα))`.
    pub fn levy_tail_asymptotic(&self, x: f64, n: usize) -> Result<f64> {
        let Family::GeometricStable { alpha } = self.family else {
            return Err(Error::Unsupported(format!(
                "tail expansion is only available for the geometric family, not {}",
                self.family.name()
            )));
        };
        if !(x > 0.0) {
            return Err(invalid("x", format!("must be positive, got {x}")));
        }
        Ok(geometric_tail_series(alpha, x.powf(alpha), n + 1))
    }
}

/// Derivatives of `1/f` from those of `f`.
pub(crate) fn recip_derivatives(f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len() - 1;
    let inv = 1.0 / f[0];
    let mut g = vec![Complex64::new(0.0, 0.0); n + 1];
    g[0] = inv;
    for m in 1..=n {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut binom = 1.0;
        for j in 1..=m {
            binom = binom * (m + 1 - j) as f64 / j as f64;
            acc += binom * f[j] * g[m - j];
        }
        g[m] = -acc * inv;
    }
    g
}

/// Tail of the stable Lévy measure with exponent `c z^γ`; zero for `γ ∈ {0, 1}`.
fn stable_tail(c: f64, gamma: f64, x: f64) -> f64 {
    if gamma <= 0.0 || gamma >= 1.0 {
        0.0
    } else {
        c * x.powf(-gamma) * recip_gamma_real(1.0 - gamma)
    }
}

/// `Σ_{ℓ=1}^{terms} (-1)^{ℓ-1} u^{-ℓ} / (ℓ Γ(1-ℓα))`.
fn geometric_tail_series(alpha: f64, u: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    let mut uk = 1.0;
    for l in 1..=terms {
        uk /= u;
        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * uk * recip_gamma_real(1.0 - l as f64 * alpha) / l as f64;
    }
    sum
}

/// `∫_u^∞ E_α(-v)/v dv` by termwise integration of the large-argument
/// Mittag-Leffler expansion, optimally truncated. Returns the value and the
/// first omitted term.
fn geometric_tail_upper(alpha: f64, u: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut uk = 1.0;
    let mut prev = f64::INFINITY;
    for l in 1..=MAX_ASYMPTOTIC_TERMS + 1 {
        uk /= u;
        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
        let t = sign * uk * recip_gamma_real(1.0 - l as f64 * alpha) / l as f64;
        if t == 0.0 {
            continue;
        }
        if t.abs() >= prev || l > MAX_ASYMPTOTIC_TERMS {
            return (sum, t.abs());
        }
        sum += t;
        prev = t.abs();
    }
    (sum, 0.0)
}

/// `∫_{x^α}^∞ E_α(-u)/u du`.
fn geometric_tail(alpha: f64, x: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Ok(expint_e1(x));
    }
    let u0 = x.powf(alpha);
    let split = u0.max(GEOMETRIC_TAIL_SPLIT);
    let (upper, err) = geometric_tail_upper(alpha, split);
    if err > 1e-8 * upper.abs() {
        log::debug!("geometric tail: truncation error {err:e} at u = {split}");
    }
    if u0 >= GEOMETRIC_TAIL_SPLIT {
        return Ok(upper);
    }
    let p = MLParams::new(alpha, 1.0)?;
    let mut failure = None;
    let r = quad::adaptive(
        |t: f64| {
            let u = t.exp();
            match mittag_leffler(&p, -u) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        u0.ln(),
        GEOMETRIC_TAIL_SPLIT.ln(),
        1e-14,
        1e-12,
        500,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if !r.converged {
        return Err(Error::NonConvergence {
            what: "geometric Lévy tail quadrature",
            estimate: r.abs_err,
            requested: 1e-12 * r.value.abs(),
        });
    }
    Ok(r.value + upper)
}
