//! Monte Carlo simulation of the subordinator families on a time skeleton,
//! with first-passage undershoots and goodness-of-fit statistics.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exponent::{ExponentModel, Family};
use crate::potential::{InversionParams, Method};
use crate::undershoot::{interval_prob, undershoot_cdf, undershoot_mass};

/// Skeleton steps allowed per sample before giving up.
const MAX_STEPS: u64 = 100_000_000;

/// Number of histogram bins on `(0,1)` by [`SampleSet::histogram`].
pub const HISTOGRAM_BINS: usize = 64;

/// Configuration of a first-passage simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ExponentModel,
    /// Passage level `s`.
    pub level: f64,
    /// Skeleton time step `δ`.
    pub step: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    /// Configuration with the default step [`default_step`].
    pub fn new(model: ExponentModel, level: f64, n_samples: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            model,
            level,
            step: default_step(&model, level)?,
            n_samples,
            seed,
            workers: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level.is_finite()) {
            return Err(invalid("level", format!("must be positive and finite, got {}", self.level)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid("step", format!("must be positive and finite, got {}", self.step)));
        }
        if self.n_samples == 0 {
            return Err(invalid("n_samples", "must be positive"));
        }
        if self.workers == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }
        if self.model.killing_rate() > 0.0 {
            return Err(Error::Unsupported("simulation of killed subordinators".into()));
        }
        Ok(())
    }
}

/// Normalized undershoots `X_{T(s)-}/s` together with the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub config: SimConfig,
    /// Mean of the last non-crossing skeleton increment, relative to `s`.
    pub mean_last_step: f64,
}

impl SampleSet {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn ks_statistic<F: Fn(f64) -> f64>(&self, cdf: F) -> Result<f64> {
        ks_statistic(&self.values, cdf)
    }

    /// Counts in [`HISTOGRAM_BINS`] equal bins on `[0,1]`.
    pub fn histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; HISTOGRAM_BINS];
        for &v in &self.values {
            let i = ((v * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
            h[i] += 1;
        }
        h
    }
}

/// Skeleton step whose increment scale `1/Φ⁻¹(1/δ)` equals `s/500`.
pub fn default_step(m: &ExponentModel, level: f64) -> Result<f64> {
    if !(level > 0.0) {
        return Err(invalid("level", format!("must be positive, got {level}")));
    }
    Ok(1.0 / m.phi_real(500.0 / level))
}

/// Typical size `1/Φ⁻¹(1/δ)` of an increment over time `δ`.
pub fn increment_scale(m: &ExponentModel, step: f64) -> Result<f64> {
    Ok(1.0 / m.phi_inverse(1.0 / step)?)
}

fn check_open_unit(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must lie in (0,1), got {alpha}")))
    }
}

/// `ln S` for a positive `α`-stable `S` with `E e^{-λS} = e^{-λ^α}`
/// (Kanter's representation).
fn ln_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = PI * rng.sample::<f64, _>(Open01);
    let e: f64 = rng.sample(Exp1);
    // S = sin(αU)/sin(U)^{1/α} · (sin((1-α)U)/E)^{(1-α)/α}
    (alpha * u).sin().ln() - u.sin().ln() / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).sin().ln() - e.ln())
}

/// A positive `α`-stable draw with Laplace transform `e^{-λ^α}`.
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    check_open_unit(alpha)?;
    Ok(ln_positive_stable(alpha, rng).exp())
}

/// `ln G` for `G ~ Gamma(shape, 1)`. Shapes below one are boosted:
/// `G = G' U^{1/shape}` with `G' ~ Gamma(1 + shape, 1)`.
fn ln_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("positive shape");
        return g.sample(rng).ln();
    }
    let g = Gamma::new(1.0 + shape, 1.0).expect("positive shape");
    let u: f64 = rng.sample(Open01);
    g.sample(rng).ln() + u.ln() / shape
}

/// `ln` of a geometric `α`-stable increment over time `δ`: `G^{1/α} S_α`
/// with `G ~ Gamma(δ, 1)`, so that `E e^{-λX} = (1 + λ^α)^{-δ}`.
fn ln_geometric_increment<R: Rng + ?Sized>(alpha: f64, delta: f64, rng: &mut R) -> f64 {
    let lg = ln_gamma_draw(delta, rng);
    if alpha == 1.0 {
        lg
    } else {
        lg / alpha + ln_positive_stable(alpha, rng)
    }
}

/// Increment of a `γ`-stable part with weight `c` over time `δ`;
/// `γ = 1` is the pure drift `cδ`.
fn stable_increment<R: Rng + ?Sized>(c: f64, gamma: f64, delta: f64, rng: &mut R) -> f64 {
    if gamma == 1.0 {
        c * delta
    } else {
        ((c * delta).ln() / gamma + ln_positive_stable(gamma, rng)).exp()
    }
}

/// An increment `X_δ` of the (unkilled) subordinator.
pub fn sample_increment<R: Rng + ?Sized>(m: &ExponentModel, delta: f64, rng: &mut R) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    Ok(match *m.family() {
        Family::StableSum { c1, c2, alpha, beta } => {
            if alpha == 0.0 {
                return Err(Error::Unsupported(
                    "alpha = 0 is a killing rate; killed paths are not simulated".into(),
                ));
            }
            stable_increment(c1, alpha, delta, rng) + stable_increment(c2, beta, delta, rng)
        }
        Family::GeometricStable { alpha } => ln_geometric_increment(alpha, delta, rng).exp(),
        Family::StablePlusGeometric { alpha, beta } => {
            stable_increment(1.0, beta, delta, rng) + ln_geometric_increment(alpha, delta, rng).exp()
        }
    })
}

/// A Beta(α, 1-α) draw, the limiting undershoot law.
pub fn exact_beta_sample<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    check_open_unit(alpha)?;
    let a = ln_gamma_draw(alpha, rng);
    let b = ln_gamma_draw(1.0 - alpha, rng);
    Ok(1.0 / (1.0 + (b - a).exp()))
}

/// Per-sample generator: stream `index` of the ChaCha8 generator keyed by `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Walks one skeleton path to its first passage above `s`.
/// Returns `(undershoot / s, last non-crossing increment / s)`.
fn one_passage(m: &ExponentModel, s: f64, delta: f64, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let mut x = 0.0;
    let mut last = 0.0;
    for _ in 0..MAX_STEPS {
        let inc = sample_increment(m, delta, rng)?;
        if x + inc > s {
            return Ok((x / s, last / s));
        }
        x += inc;
        last = inc;
    }
    Err(Error::NonConvergence {
        what: "first passage (step limit reached)",
        estimate: x,
        requested: s,
    })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Unsupported(format!("cannot start worker pool: {e}")))
}

/// Simulates `n_samples` first passages above `level`.
///
/// Sample `i` uses [`substream`]`(seed, i)`, so the output does not depend on
/// the number of workers.
pub fn simulate_undershoot(cfg: &SimConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let scale = increment_scale(&cfg.model, cfg.step)?;
    if scale > cfg.level / 100.0 {
        log::warn!(
            "skeleton step {} gives increments of typical size {scale:.3e}, above level/100 = {:.3e}",
            cfg.step,
            cfg.level / 100.0
        );
    }
    let out: Result<Vec<(f64, f64)>> = pool(cfg.workers)?.install(|| {
        (0..cfg.n_samples)
            .into_par_iter()
            .map(|i| one_passage(&cfg.model, cfg.level, cfg.step, &mut substream(cfg.seed, i as u64)))
            .collect()
    });
    let out = out?;
    let mean_last_step = out.iter().map(|p| p.1).sum::<f64>() / out.len() as f64;
    if mean_last_step > 0.05 {
        log::warn!("mean last skeleton increment is {mean_last_step:.3e} of the level; expect visible skeleton bias");
    }
    Ok(SampleSet {
        values: out.into_iter().map(|p| p.0).collect(),
        config: *cfg,
        mean_last_step,
    })
}

/// Kolmogorov–Smirnov distance between the empirical law of `values` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

/// Monte Carlo estimate of `E e^{-λ X_δ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformCheck {
    pub delta: f64,
    pub lambda: f64,
    pub mean: f64,
    pub stderr: f64,
    /// `e^{-δΦ(λ)}`.
    pub expected: f64,
}

impl TransformCheck {
    /// Deviation in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.mean - self.expected).abs() / self.stderr
    }
}

/// Transform checks at each `λ` from one batch of `n` increments.
pub fn transform_check(
    m: &ExponentModel,
    delta: f64,
    lambdas: &[f64],
    n: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<TransformCheck>> {
    if n < 2 {
        return Err(invalid("n", "need at least two draws"));
    }
    const CHUNK: usize = 4096;
    let chunks = n.div_ceil(CHUNK);
    let k = lambdas.len();
    // Per-chunk sums of e^{-λX} and e^{-2λX}, reduced in chunk order.
    let parts: Result<Vec<Vec<(f64, f64)>>> = pool(workers)?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = substream(seed, c as u64);
                let mut acc = vec![(0.0, 0.0); k];
                for _ in (c * CHUNK)..((c + 1) * CHUNK).min(n) {
                    let x = sample_increment(m, delta, &mut rng)?;
                    for (a, &l) in acc.iter_mut().zip(lambdas) {
                        let e = (-l * x).exp();
                        a.0 += e;
                        a.1 += e * e;
                    }
                }
                Ok(acc)
            })
            .collect()
    });
    let mut sums = vec![(0.0, 0.0); k];
    for part in parts? {
        for (s, p) in sums.iter_mut().zip(part) {
            s.0 += p.0;
            s.1 += p.1;
        }
    }
    let nf = n as f64;
    Ok(lambdas
        .iter()
        .zip(sums)
        .map(|(&lambda, (s1, s2))| {
            let mean = s1 / nf;
            let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
            TransformCheck {
                delta,
                lambda,
                mean,
                stderr: (var / nf).sqrt(),
                expected: (-delta * m.phi_real(lambda)).exp(),
            }
        })
        .collect())
}

/// A CDF on `[0,1]` tabulated at increasing nodes and interpolated linearly
/// in `θ = (2/π) asin √x`, in which the arcsine law is exactly linear.
/// Below the smallest positive node it is interpolated linearly in
/// `1/ln(1/x)`, matching the `1/log` decay of the geometric families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCdf {
    /// Increasing nodes, starting at 0 and ending at 1.
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

fn theta(x: f64) -> f64 {
    x.sqrt().asin() / FRAC_PI_2
}

impl TabulatedCdf {
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return self.values[n - 1];
        }
        let x1 = self.nodes[1];
        if x < x1 {
            return self.values[1] * x1.ln() / x.ln();
        }
        let i = self.nodes.partition_point(|&v| v <= x).clamp(2, n - 1) - 1;
        let (a, b) = (theta(self.nodes[i]), theta(self.nodes[i + 1]));
        let t = (theta(x) - a) / (b - a);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

/// Tabulates the undershoot CDF at level `s`: `points` nodes equispaced in
/// `θ` plus a decade grid from the first of them down to `x_min`. The value
/// at `x = 1` includes the creeping atom.
pub fn undershoot_cdf_table(
    m: &ExponentModel,
    s: f64,
    points: usize,
    x_min: f64,
    p: &InversionParams,
    method: Method,
) -> Result<TabulatedCdf> {
    if points < 3 {
        return Err(invalid("points", format!("need at least 3, got {points}")));
    }
    if !(x_min > 0.0 && x_min < 1.0) {
        return Err(invalid("x_min", format!("must lie in (0,1), got {x_min}")));
    }
    let h = 1.0 / (points - 1) as f64;
    let mut inner: Vec<f64> = (1..points - 1).map(|i| (FRAC_PI_2 * i as f64 * h).sin().powi(2)).collect();
    let mut x = inner[0] / 10.0;
    while x > x_min {
        inner.push(x);
        x /= 10.0;
    }
    inner.push(x_min.min(inner[0]));
    inner.sort_by(f64::total_cmp);
    inner.dedup();

    let first = undershoot_cdf(m, s, inner[0], p, method)?;
    let pieces: Result<Vec<f64>> = inner
        .par_windows(2)
        .map(|w| interval_prob(m, s, w[0], w[1], p, method))
        .collect();
    let mut values = Vec::with_capacity(inner.len() + 2);
    values.push(0.0);
    values.push(first);
    let mut acc = first;
    for piece in pieces? {
        acc += piece;
        values.push(acc);
    }
    // The last interval, up to and including x = 1, comes from the total.
    let total = undershoot_mass(m, s, p, method)?.total;
    values.push(total.max(acc));
    let mut nodes = Vec::with_capacity(values.len());
    nodes.push(0.0);
    nodes.extend(inner);
    nodes.push(1.0);
    Ok(TabulatedCdf { nodes, values })
}
