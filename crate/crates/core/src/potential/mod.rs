//! The potential density `u` of a subordinator, evaluated by Fourier
//! inversion of `1/Φ`, by the Mittag-Leffler closed form (stable sums), or by
//! its asymptotic expansions.

mod expansion;
mod fourier;

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

pub use expansion::{
    eval_expansion, expansion_series_long, expansion_series_short, geometric_max_order, ExpansionSeries, Regime,
};

use crate::error::{invalid, Error, Result};
use crate::exponent::{recip_derivatives, ExponentModel, Family, N_MAX};
use crate::quad;
use crate::special::{mittag_leffler, recip_gamma_real, MLParams};

/// Relative tolerance requested from the Mittag-Leffler evaluator.
const CLOSED_FORM_TOL: f64 = 1e-12;

/// Parameters of the Fourier inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionParams {
    /// Derivative order `N` applied to `1/Φ` before inverting.
    pub n: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Decay exponent of `|(d/dz)^N (1/Φ)(z)|` as `|z| → ∞`; must be below -1.
    pub tail_exponent: f64,
    /// Integrate the negative half-line as well and report the imaginary
    /// residue of the assembled integral.
    pub check_symmetry: bool,
}

impl InversionParams {
    /// Default order and decay exponent for the model's family.
    pub fn for_model(m: &ExponentModel) -> Self {
        let n = default_order(m);
        Self {
            n,
            abs_tol: 1e-14,
            rel_tol: 1e-9,
            max_panels: 5000,
            tail_exponent: tail_exponent(m, n),
            check_symmetry: false,
        }
    }

    /// Same tolerances with a different derivative order.
    pub fn with_order(mut self, m: &ExponentModel, n: usize) -> Self {
        self.n = n;
        self.tail_exponent = tail_exponent(m, n);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.n > N_MAX {
            return Err(invalid("N", format!("must lie in 1..={N_MAX}, got {}", self.n)));
        }
        if !(self.abs_tol > 0.0) {
            return Err(invalid("abs_tol", format!("must be positive, got {}", self.abs_tol)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol", format!("must be positive, got {}", self.rel_tol)));
        }
        if self.max_panels == 0 {
            return Err(invalid("max_panels", "must be positive"));
        }
        if !(self.tail_exponent < -1.0) {
            return Err(invalid(
                "tail_exponent",
                format!("must be below -1 for an integrable tail, got {}", self.tail_exponent),
            ));
        }
        Ok(())
    }
}

/// Smallest inversion order the family's leading-order analysis calls for.
pub fn default_order(m: &ExponentModel) -> usize {
    match *m.family() {
        Family::StableSum { alpha, beta, .. } => {
            // smallest N with -N - α + (β - α) < -1
            let mut n = 1;
            while -(n as f64) - alpha + (beta - alpha) >= -1.0 {
                n += 1;
            }
            n
        }
        Family::GeometricStable { .. } => 2,
        Family::StablePlusGeometric { .. } => 1,
    }
}

fn tail_exponent(m: &ExponentModel, n: usize) -> f64 {
    match *m.family() {
        Family::StableSum { beta, .. } | Family::StablePlusGeometric { beta, .. } => -(n as f64) - beta,
        Family::GeometricStable { .. } => -(n as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluator {
    Inversion,
    ClosedForm,
    Expansion,
}

/// Which potential-density evaluator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed form when available, Fourier inversion otherwise.
    #[default]
    Auto,
    ClosedForm,
    Inversion,
}

/// A density value with its provenance and error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEval {
    pub value: f64,
    pub evaluator: Evaluator,
    pub abs_err: f64,
    /// Imaginary part of the assembled inversion integral, when computed.
    pub imag_residue: Option<f64>,
}

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid("x", format!("must be positive and finite, got {x}")))
    }
}

/// `u(x)` by Fourier inversion of `1/Φ` along `Re z = 1/x`.
pub fn potential_density_fourier(m: &ExponentModel, x: f64, p: &InversionParams) -> Result<DensityEval> {
    check_x(x)?;
    p.validate()?;
    let deriv = |z: Complex64, k: usize| recip_derivatives(&m.phi_derivatives_unchecked(z, k));
    let r = fourier::invert(deriv, x, &settings(p))?;
    Ok(DensityEval {
        value: r.value,
        evaluator: Evaluator::Inversion,
        abs_err: r.abs_err,
        imag_residue: r.imag_residue,
    })
}

fn settings(p: &InversionParams) -> fourier::Settings {
    fourier::Settings {
        n: p.n,
        abs_tol: p.abs_tol,
        rel_tol: p.rel_tol,
        max_panels: p.max_panels,
        tail_exponent: p.tail_exponent,
        check_symmetry: p.check_symmetry,
    }
}

fn stable_sum_params(m: &ExponentModel) -> Result<(f64, f64, f64, f64)> {
    match *m.family() {
        Family::StableSum { c1, c2, alpha, beta } => Ok((c1, c2, alpha, beta)),
        ref f => Err(Error::Unsupported(format!(
            "the closed form is only available for the stable-sum family, not {}",
            f.name()
        ))),
    }
}

/// `u(x) = x^{β-1}/C2 · E_{β-α,β}(-C1 x^{β-α}/C2)` for the stable-sum family.
pub fn potential_density_closed(m: &ExponentModel, x: f64) -> Result<f64> {
    let (c1, c2, alpha, beta) = stable_sum_params(m)?;
    check_x(x)?;
    let d = beta - alpha;
    let p = MLParams::new(d, beta)?.with_tol(CLOSED_FORM_TOL)?;
    Ok(x.powf(beta - 1.0) / c2 * mittag_leffler(&p, -c1 * x.powf(d) / c2)?)
}

/// `u(x)` by the requested method.
pub fn potential_density(m: &ExponentModel, x: f64, p: &InversionParams, method: Method) -> Result<DensityEval> {
    let closed = matches!(m.family(), Family::StableSum { .. });
    match method {
        Method::ClosedForm | Method::Auto if closed => {
            let value = potential_density_closed(m, x)?;
            Ok(DensityEval {
                value,
                evaluator: Evaluator::ClosedForm,
                abs_err: 10.0 * CLOSED_FORM_TOL * value.abs(),
                imag_residue: None,
            })
        }
        Method::ClosedForm => Err(stable_sum_params(m).unwrap_err()),
        _ => potential_density_fourier(m, x, p),
    }
}

/// `U([0, y])`, the potential measure of `[0, y]`.
///
/// Closed form for stable sums, `y^β/C2 · E_{β-α,β+1}(-C1 y^{β-α}/C2)`;
/// otherwise Fourier inversion of its Laplace transform `1/(zΦ(z))`.
pub fn potential_mass(m: &ExponentModel, y: f64, p: &InversionParams, method: Method) -> Result<f64> {
    check_x(y)?;
    let closed = matches!(m.family(), Family::StableSum { .. });
    if closed && method != Method::Inversion {
        let (c1, c2, alpha, beta) = stable_sum_params(m)?;
        let d = beta - alpha;
        let q = MLParams::new(d, beta + 1.0)?.with_tol(CLOSED_FORM_TOL)?;
        return Ok(y.powf(beta) / c2 * mittag_leffler(&q, -c1 * y.powf(d) / c2)?);
    }
    let n = 1;
    let mut s = settings(p);
    s.n = n;
    s.tail_exponent = tail_exponent(m, n) - 1.0;
    s.check_symmetry = false;
    let deriv = |z: Complex64, k: usize| {
        // (zΦ)^{(j)} = z Φ^{(j)} + j Φ^{(j-1)}
        let phi = m.phi_derivatives_unchecked(z, k);
        let zphi: Vec<Complex64> = (0..=k)
            .map(|j| z * phi[j] + if j > 0 { j as f64 * phi[j - 1] } else { Complex64::new(0.0, 0.0) })
            .collect();
        recip_derivatives(&zphi)
    };
    Ok(fourier::invert(deriv, y, &s)?.value)
}

/// Index and constant of the leading long-range behaviour
/// `u(x) ~ x^{ρ-1} / (c Γ(ρ))`.
pub fn long_range_leading(m: &ExponentModel) -> (f64, f64) {
    match *m.family() {
        Family::StableSum { c1, c2, alpha, beta } => {
            if alpha > 0.0 {
                (alpha, c1)
            } else {
                (beta, c2)
            }
        }
        Family::GeometricStable { alpha } => (alpha, 1.0),
        Family::StablePlusGeometric { alpha, beta } => {
            if alpha < beta {
                (alpha, 1.0)
            } else if beta < alpha {
                (beta, 1.0)
            } else {
                (alpha, 2.0)
            }
        }
    }
}

/// Outcome of the Laplace-transform consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceCheck {
    pub lambda: f64,
    pub x_max: f64,
    /// `∫_0^{x_max} e^{-λx} u(x) dx`.
    pub lhs: f64,
    /// `1/Φ(λ)`.
    pub rhs: f64,
    /// Bound on `∫_{x_max}^∞ e^{-λx} u(x) dx` from the leading long-range term.
    pub tail_bound: f64,
    /// Quadrature error estimate of `lhs`.
    pub quad_err: f64,
}

/// Compares `∫_0^{x_max} e^{-λx} u(x) dx` with `1/Φ(λ)`.
///
/// The mass of `[0, ε]` (with `ε = 1e-9 · min(1, x_max)`) is taken from
/// [`potential_mass`]; the rest is integrated in `log x`.
pub fn laplace_check(
    m: &ExponentModel,
    lambda: f64,
    x_max: f64,
    p: &InversionParams,
    method: Method,
) -> Result<LaplaceCheck> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    if !(x_max > 0.0) {
        return Err(invalid("x_max", format!("must be positive, got {x_max}")));
    }
    let eps = 1e-9 * x_max.min(1.0);
    let head = potential_mass(m, eps, p, method)?;
    let mut failure = None;
    let r = quad::adaptive(
        |t: f64| {
            let x = t.exp();
            match potential_density(m, x, p, method) {
                Ok(d) => (-lambda * x).exp() * d.value * x,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        eps.ln(),
        x_max.ln(),
        1e-12,
        1e-9,
        400,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (rho, c0) = long_range_leading(m);
    let tail_bound = x_max.powf(rho - 1.0) * (-lambda * x_max).exp() / lambda * recip_gamma_real(rho) / c0;
    Ok(LaplaceCheck {
        lambda,
        x_max,
        lhs: head + r.value,
        rhs: 1.0 / m.phi_real(lambda),
        tail_bound,
        // e^{-λx} ≥ 1 - λε on [0, ε]
        quad_err: r.abs_err + lambda * eps * head,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    #[test]
    fn default_orders() {
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).unwrap();
        assert_eq!(default_order(&m), 2);
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(default_order(&m), 2);
        let p = InversionParams::for_model(&m);
        assert!((p.tail_exponent + 3.0).abs() < 1e-15);
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.6, 0.9).unwrap();
        assert_eq!(default_order(&m), 1);
        assert_eq!(default_order(&ExponentModel::geometric(0.5).unwrap()), 2);
    }

    #[test]
    fn params_validation() {
        let m = ExponentModel::geometric(0.5).unwrap();
        let mut p = InversionParams::for_model(&m);
        assert!(p.validate().is_ok());
        p.tail_exponent = -0.5;
        assert!(p.validate().is_err());
        let p = InversionParams::for_model(&m).with_order(&m, 13);
        assert!(p.validate().is_err());
    }

    #[test]
    fn closed_form_at_one() {
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).unwrap();
        let u = potential_density_closed(&m, 1.0).unwrap();
        assert!((u - 0.289_065_279_312_935_96).abs() < 1e-14);
        let g = ExponentModel::geometric(0.5).unwrap();
        assert!(potential_density_closed(&g, 1.0).is_err());
    }

    #[test]
    fn inversion_matches_closed_form() {
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.5, 1.0).unwrap();
        let mut p = InversionParams::for_model(&m);
        p.check_symmetry = true;
        let d = potential_density_fourier(&m, 1.0, &p).unwrap();
        let want = 0.427_583_576_155_807;
        assert!((d.value - want).abs() < 1e-9 * want, "{}", d.value);
        assert!(d.imag_residue.unwrap() <= 1e-12);
    }

    #[test]
    fn mass_closed_vs_inversion() {
        let m = ExponentModel::stable_sum(1.0, 1.0, 0.3, 0.7).unwrap();
        let p = InversionParams::for_model(&m);
        for &y in &[1e-6, 0.3, 2.0] {
            let a = potential_mass(&m, y, &p, Method::Auto).unwrap();
            let b = potential_mass(&m, y, &p, Method::Inversion).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "y={y}: {a} {b}");
        }
        // Small-y behaviour y^β / (C2 Γ(β+1)).
        let y: f64 = 1e-12;
        let a = potential_mass(&m, y, &p, Method::Auto).unwrap();
        assert!((a / (y.powf(0.7) / gamma(1.7)) - 1.0).abs() < 1e-4);
    }
}
