//! Special-function kernels.

mod dd;
mod expint;
mod gamma;
mod laurent;
mod mittag_leffler;

use std::f64::consts::PI;

pub use dd::DoubleDouble;
pub use expint::expint_e1;
pub use gamma::{cospi, gamma, ln_gamma, recip_gamma, recip_gamma_real, sinpi};
pub use laurent::{laurent_coeffs, LaurentCoeffs, LaurentEntry};
pub use mittag_leffler::{
    asymptotic_optimal as ml_asymptotic_optimal, mittag_leffler, ml_asymptotic, Estimate,
    MLParams, Precision, MAX_ASYMPTOTIC_TERMS,
};

use crate::error::{invalid, Result};
use crate::quad;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

/// Unchecked generalized arcsine density `sin(πα)/π · x^{α-1} (1-x)^{-α}`.
pub(crate) fn beta_density_raw(alpha: f64, x: f64) -> f64 {
    sinpi(alpha) / PI * x.powf(alpha - 1.0) * (1.0 - x).powf(-alpha)
}

/// Density of the Beta(α, 1-α) (generalized arcsine) law.
pub fn beta_density(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x > 0.0 && x < 1.0) {
        return Err(invalid("x", format!("must lie in (0,1), got {x}")));
    }
    Ok(beta_density_raw(alpha, x))
}

/// `∫_0^x` of the Beta(α, 1-α) density with `x ≤ 1/2`, after `y = w^{1/α}`:
/// `(sin πα)/(πα) ∫_0^{x^α} (1 - w^{1/α})^{-α} dw`, a smooth integrand.
fn beta_cdf_lower(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let top = x.powf(alpha);
    let r = quad::adaptive(
        |w: f64| (1.0 - w.powf(1.0 / alpha)).powf(-alpha),
        0.0,
        top,
        1e-15,
        1e-13,
        200,
    );
    sinpi(alpha) / (PI * alpha) * r.value
}

/// Distribution function of Beta(α, 1-α); defined for all real `x`.
pub fn beta_cdf(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if x.is_nan() {
        return Ok(f64::NAN);
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    if x == 0.5 && alpha == 0.5 {
        return Ok(0.5);
    }
    let v = if x <= 0.5 {
        beta_cdf_lower(alpha, x)
    } else {
        // Reflection: 1 - X is Beta(1-α, α).
        1.0 - beta_cdf_lower(1.0 - alpha, 1.0 - x)
    };
    Ok(v.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn arcsine_midpoint() {
        assert!((beta_density(0.5, 0.5).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!(beta_density(0.5, 0.0).is_err());
        assert!(beta_density(1.0, 0.5).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        let total = beta_cdf_lower(0.3, 0.5) + beta_cdf_lower(0.7, 0.5);
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn arcsine_cdf_closed_form() {
        for &x in &[1e-6f64, 0.01, 0.2, 0.5, 0.77, 0.999] {
            let want = 2.0 / PI * x.sqrt().asin();
            assert!((beta_cdf(0.5, x).unwrap() - want).abs() < 1e-12, "x={x}");
        }
    }

    proptest! {
        #[test]
        fn arcsine_symmetry(x in 0.001f64..0.999) {
            let a = beta_density(0.5, x).unwrap();
            let b = beta_density(0.5, 1.0 - x).unwrap();
            prop_assert!((a - b).abs() <= 1e-13 * a);
        }

        #[test]
        fn beta_reflection_identity(alpha in 0.05f64..0.95, x in 0.01f64..0.99) {
            // f_α(x) ((1-x)/x)^{2α-1} = f_α(1-x)
            let lhs = beta_density(alpha, x).unwrap() * ((1.0 - x) / x).powf(2.0 * alpha - 1.0);
            let rhs = beta_density(alpha, 1.0 - x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }

        #[test]
        fn gamma_reflection(x in 0.001f64..0.999, y in -3.0f64..3.0) {
            let z = Complex64::new(x, y);
            let lhs = recip_gamma(z) * recip_gamma(Complex64::new(1.0, 0.0) - z);
            let s = Complex64::new(sinpi(x) * (PI * y).cosh(), cospi(x) * (PI * y).sinh()) / PI;
            prop_assert!((lhs - s).norm() <= 1e-12 * s.norm());
        }

        #[test]
        fn cdf_monotone(alpha in 0.05f64..0.95, x in 0.0f64..0.99, dx in 0.0f64..0.01) {
            let a = beta_cdf(alpha, x).unwrap();
            let b = beta_cdf(alpha, x + dx).unwrap();
            prop_assert!(b >= a - 1e-13);
        }
    }
}
