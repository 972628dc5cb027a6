//! Log-log least-squares estimation of decay exponents.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Minimum span of the abscissae, in decades.
pub const MIN_SPAN_DECADES: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub n_points: usize,
    pub predicted: f64,
    pub tol: f64,
    /// `|slope - predicted| ≤ tol`.
    pub pass: bool,
    /// The fitted decay is at least as fast as predicted, up to `tol`:
    /// `sign(predicted) · slope ≥ |predicted| - tol`. The predicted exponents
    /// are upper bounds, so a steeper slope still satisfies them.
    pub pass_bound: bool,
}

fn check_points(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 3 {
        return Err(invalid("points", format!("need at least 3, got {}", points.len())));
    }
    for &(s, e) in points {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid("points", format!("abscissa must be positive, got {s}")));
        }
        if !(e > 0.0 && e.is_finite()) {
            return Err(invalid("points", format!("error must be positive, got {e} at {s}")));
        }
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(s, _)| (lo.min(s), hi.max(s)));
    let span = (hi / lo).log10();
    if span < MIN_SPAN_DECADES {
        return Err(invalid(
            "points",
            format!("abscissae span {span:.2} decades, need at least {MIN_SPAN_DECADES}"),
        ));
    }
    Ok(())
}

/// Ordinary least squares of `ys` on `xs`: `(slope, intercept, stderr)`.
fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let stderr = if xs.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, intercept, stderr)
}

fn fit(xs: Vec<f64>, ys: Vec<f64>, predicted: f64, tol: f64) -> RateFit {
    let (slope, intercept, stderr) = ols(&xs, &ys);
    let sign = if predicted < 0.0 { -1.0 } else { 1.0 };
    RateFit {
        slope,
        intercept,
        stderr,
        n_points: xs.len(),
        predicted,
        tol,
        pass: (slope - predicted).abs() <= tol,
        pass_bound: sign * slope >= predicted.abs() - tol,
    }
}

/// Fits `ln err = intercept + slope · ln s`.
pub fn estimate_rate(points: &[(f64, f64)], predicted: f64, tol: f64) -> Result<RateFit> {
    check_points(points)?;
    let xs = points.iter().map(|p| p.0.ln()).collect();
    let ys = points.iter().map(|p| p.1.ln()).collect();
    Ok(fit(xs, ys, predicted, tol))
}

/// Like [`estimate_rate`] for remainders of the form `s^p |ln s|`: fits
/// `ln err - ln|ln s|` against `ln s`.
pub fn estimate_rate_log(points: &[(f64, f64)], predicted: f64, tol: f64) -> Result<RateFit> {
    check_points(points)?;
    if points.iter().any(|p| p.0 == 1.0) {
        return Err(invalid("points", "s = 1 has no log factor"));
    }
    let xs = points.iter().map(|p| p.0.ln()).collect();
    let ys = points.iter().map(|p| p.1.ln() - p.0.ln().abs().ln()).collect();
    Ok(fit(xs, ys, predicted, tol))
}

/// `n` points spaced evenly in `log s` on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
