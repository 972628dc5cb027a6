//! Fourier inversion of a Laplace transform `F` along the vertical line
//! `Re z = 1/x`.
//!
//! For a function `f` on `(0, ∞)` with Laplace transform `F`,
//!
//! ```text
//! f(x) = x^{-N} e^{λx}/(2π) ∫ e^{iθx} ((-d/dz)^N F)(λ + iθ) dθ,   λ = 1/x.
//! ```
//!
//! Substituting `θ = t/x` gives `f(x) = e/(2π x^{N+1}) ∫ e^{it} A(t) dt` with
//! `A(t) = (-1)^N F^{(N)}((1+it)/x)`. The half-line `t > 0` is integrated
//! panel by panel (one period `2π` per panel); the remainder `∫_T^∞` is
//! replaced by its integration-by-parts expansion
//! `e^{iT} Σ_{j<J} i^{j+1} A^{(j)}(T)`, whose own remainder is bounded from the
//! decay of `A^{(J)}`.

use std::f64::consts::{E, PI};

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;

/// Number of integration-by-parts terms in the tail correction.
const IBP_TERMS: usize = 4;

/// Settings for one inversion.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub n: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Power-law decay exponent of `|A(t)|` as `t → ∞`.
    pub tail_exponent: f64,
    pub check_symmetry: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Inversion {
    pub value: f64,
    pub abs_err: f64,
    pub imag_residue: Option<f64>,
}

struct HalfLine {
    integral: Complex64,
    abs_err: f64,
}

/// Inverts at `x`. `deriv(z, k)` must return `F(z), F'(z), …, F^{(k)}(z)`.
pub(crate) fn invert<D>(deriv: D, x: f64, s: &Settings) -> Result<Inversion>
where
    D: Fn(Complex64, usize) -> Vec<Complex64>,
{
    let n = s.n;
    // f(x) = pref * Re ∫_0^∞ e^{it} A(t) dt
    let pref = E / (PI * x.powi(n as i32 + 1));
    let abs_tol = s.abs_tol / pref;
    let plus = half_line(&deriv, x, s, 1.0, abs_tol)?;
    let value = pref * plus.integral.re;
    let mut abs_err = pref * plus.abs_err;
    let mut imag_residue = None;
    if s.check_symmetry {
        let minus = half_line(&deriv, x, s, -1.0, abs_tol)?;
        let full = plus.integral + minus.integral;
        // The two halves are integrated independently; their sum must be real.
        imag_residue = Some(0.5 * pref * full.im.abs());
        abs_err = abs_err.max(0.5 * pref * (plus.integral.re - minus.integral.re).abs());
    }
    abs_err += 8.0 * f64::EPSILON * value.abs();
    Ok(Inversion {
        value,
        abs_err,
        imag_residue,
    })
}

/// `∫_0^∞ e^{iσt} A(σt) dt` with `σ = ±1`.
fn half_line<D>(deriv: &D, x: f64, s: &Settings, sigma: f64, abs_tol: f64) -> Result<HalfLine>
where
    D: Fn(Complex64, usize) -> Vec<Complex64>,
{
    let n = s.n;
    let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
    let z_of = |t: f64| Complex64::new(1.0 / x, sigma * t / x);
    let integrand = |t: f64| {
        let d = deriv(z_of(t), n);
        Complex64::new(0.0, sigma * t).exp() * (sign_n * d[n])
    };
    // B^{(j)}(t) = (-1)^N F^{(N+j)}(z) (iσ/x)^j for B(t) = A(σt).
    let tail_derivs = |t: f64| -> Vec<Complex64> {
        let d = deriv(z_of(t), n + IBP_TERMS);
        let step = Complex64::new(0.0, sigma / x);
        let mut scale = Complex64::new(sign_n, 0.0);
        let mut out = Vec::with_capacity(IBP_TERMS + 1);
        for j in 0..=IBP_TERMS {
            out.push(d[n + j] * scale);
            scale *= step;
        }
        out
    };
    let width = 2.0 * PI;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut last_tail_err = f64::INFINITY;
    for k in 0..s.max_panels {
        let a = k as f64 * width;
        let b = a + width;
        let r = quad::adaptive(integrand, a, b, 0.01 * abs_tol, 0.05 * s.rel_tol, 200);
        if !r.value.re.is_finite() || !r.value.im.is_finite() {
            return Err(Error::NonConvergence {
                what: "Fourier inversion panel",
                estimate: f64::INFINITY,
                requested: abs_tol,
            });
        }
        total += r.value;
        err += r.abs_err;

        // Tail beyond T = b by parts. With ω = σ:
        // ∫_T^∞ e^{iωt} B dt = e^{iωT} Σ_{j<J} (i/ω)^{j+1} B^{(j)}(T) + (i/ω)^J ∫_T^∞ e^{iωt} B^{(J)}.
        let t = b;
        let bd = tail_derivs(t);
        let i_over_w = Complex64::new(0.0, 1.0 / sigma);
        let mut corr = Complex64::new(0.0, 0.0);
        let mut f = i_over_w;
        for dj in bd.iter().take(IBP_TERMS) {
            corr += f * dj;
            f *= i_over_w;
        }
        corr *= Complex64::new(0.0, sigma * t).exp();
        let rem_here = bd[IBP_TERMS].norm();
        let rem_far = tail_derivs(2.0 * t)[IBP_TERMS].norm();
        // Local decay of |B^{(J)}|, guarded by the known asymptotic rate.
        let local = if rem_here > 0.0 && rem_far > 0.0 {
            (rem_far / rem_here).log2()
        } else {
            s.tail_exponent - IBP_TERMS as f64
        };
        let decay = local.max(s.tail_exponent - IBP_TERMS as f64);
        if decay < -1.2 {
            let tail_err = rem_here * t / (-1.0 - decay);
            let target = abs_tol.max(s.rel_tol * (total + corr).re.abs());
            if tail_err + err <= target {
                return Ok(HalfLine {
                    integral: total + corr,
                    abs_err: err + tail_err,
                });
            }
            // Once the bound stops improving, more panels will not help.
            if tail_err >= last_tail_err && tail_err < 0.1 * target && err > target {
                break;
            }
            last_tail_err = tail_err;
        }
    }
    let target = abs_tol.max(s.rel_tol * total.re.abs());
    Err(Error::NonConvergence {
        what: "Fourier inversion",
        estimate: err,
        requested: target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// F(z) = 1/(z+1)^2 is the transform of f(x) = x e^{-x}.
    fn deriv(z: Complex64, k: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(k + 1);
        let w = z + 1.0;
        let mut c = 1.0;
        for j in 0..=k {
            if j > 0 {
                c *= -((j + 1) as f64);
            }
            out.push(c / w.powi(j as i32 + 2));
        }
        out
    }

    #[test]
    fn recovers_gamma_density() {
        for n in 1..=3 {
            let s = Settings {
                n,
                abs_tol: 1e-12,
                rel_tol: 1e-10,
                max_panels: 2000,
                tail_exponent: -(n as f64) - 2.0,
                check_symmetry: true,
            };
            for &x in &[0.05, 0.5, 1.0, 3.0, 10.0] {
                let r = invert(deriv, x, &s).unwrap();
                let want = x * (-x).exp();
                assert!(
                    (r.value - want).abs() <= 1e-9 * want.max(1e-3),
                    "n={n} x={x}: {} vs {want}",
                    r.value
                );
                assert!(r.imag_residue.unwrap() <= 1e-10);
            }
        }
    }
}
