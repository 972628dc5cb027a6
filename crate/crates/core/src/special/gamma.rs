//! Reciprocal gamma function on the complex plane.
//!
//! Lanczos approximation (g = 7, nine coefficients) on `Re z >= 1/2` and the
//! reflection formula `1/Γ(z) = sin(πz) Γ(1-z) / π` elsewhere. The zeros at
//! the non-positive integers are returned exactly.

use std::f64::consts::PI;

use num::complex::Complex64;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `sin(πx)`, exactly zero at the integers.
pub fn sinpi(x: f64) -> f64 {
    let n = x.round();
    let s = (PI * (x - n)).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

/// `cos(πx)`, exactly zero at the half-integers.
pub fn cospi(x: f64) -> f64 {
    let n = x.round();
    let f = x - n;
    let c = if f.abs() == 0.5 { 0.0 } else { (PI * f).cos() };
    if n.rem_euclid(2.0) == 0.0 {
        c
    } else {
        -c
    }
}

fn sinpi_c(z: Complex64) -> Complex64 {
    Complex64::new(
        sinpi(z.re) * (PI * z.im).cosh(),
        cospi(z.re) * (PI * z.im).sinh(),
    )
}

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Lanczos series sum for argument `z` (already shifted by one).
fn lanczos_sum_c(zm1: Complex64) -> Complex64 {
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (zm1 + i as f64);
    }
    acc
}

fn lanczos_sum(zm1: f64) -> f64 {
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (zm1 + i as f64);
    }
    acc
}

/// `ln Γ(z)` for `Re z >= 1/2` (principal branch of the Lanczos form).
fn ln_gamma_right_c(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let t = zm1 + LANCZOS_G + 0.5;
    HALF_LN_2PI + (zm1 + 0.5) * t.ln() - t + lanczos_sum_c(zm1).ln()
}

/// `ln |Γ(x)|` for real `x` that is not a non-positive integer.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.5 {
        if is_non_positive_integer(x) {
            return f64::INFINITY;
        }
        return (PI / sinpi(x).abs()).ln() - ln_gamma(1.0 - x);
    }
    let zm1 = x - 1.0;
    let t = zm1 + LANCZOS_G + 0.5;
    HALF_LN_2PI + (zm1 + 0.5) * t.ln() - t + lanczos_sum(zm1).ln()
}

/// `Γ(x)` for real `x`; infinite at the poles.
pub fn gamma(x: f64) -> f64 {
    let r = recip_gamma_real(x);
    if r == 0.0 {
        f64::INFINITY
    } else {
        1.0 / r
    }
}

/// `1/Γ(x)` for real `x`.
pub fn recip_gamma_real(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if is_non_positive_integer(x) {
        return 0.0;
    }
    if x < 0.5 {
        let g = gamma_right(1.0 - x);
        return sinpi(x) * g / PI;
    }
    if x == x.round() && x <= 171.0 {
        // (x-1)! is exact in double up to 22!.
        let mut f = 1.0;
        for k in 2..(x as u32) {
            f *= k as f64;
        }
        return 1.0 / f;
    }
    1.0 / gamma_right(x)
}

/// `Γ(x)` for `x >= 1/2`, evaluated directly where it cannot overflow.
fn gamma_right(x: f64) -> f64 {
    if x > 140.0 {
        return ln_gamma(x).exp();
    }
    let zm1 = x - 1.0;
    let t = zm1 + LANCZOS_G + 0.5;
    // Split the power so t^(x-1/2) does not overflow before e^{-t} is applied.
    let half = t.powf(0.5 * (zm1 + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(zm1)
}

/// The reciprocal gamma function `1/Γ(z)`, an entire function.
///
/// Exactly zero at `z = 0, -1, -2, …`; real input gives real output and NaN
/// propagates.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if z.re.is_nan() || z.im.is_nan() {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    if z.im == 0.0 {
        return Complex64::new(recip_gamma_real(z.re), 0.0);
    }
    if z.re < 0.5 {
        // 1/Γ(z) = sin(πz) Γ(1-z) / π
        let g = ln_gamma_right_c(1.0 - z).exp();
        return sinpi_c(z) * g / PI;
    }
    (-ln_gamma_right_c(z)).exp()
}
