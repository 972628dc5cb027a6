use std::collections::BTreeMap;

use serde_json::{json, Value};

use arcsine_core::montecarlo::{simulate_undershoot, undershoot_cdf_table, SimConfig};
use arcsine_core::potential::{
    eval_expansion, expansion_series_long, expansion_series_short, laplace_check, long_range_leading,
    potential_density, potential_density_closed, potential_density_fourier,
};
use arcsine_core::rate::{estimate_rate, estimate_rate_log};
use arcsine_core::special::{beta_cdf, laurent_coeffs};
use arcsine_core::undershoot::{
    interval_prob, remainder_exponent, sup_error, undershoot_approx, undershoot_density,
};
use arcsine_core::{Error as CoreError, ExponentModel, Family, InversionParams, Method, Regime};

use crate::args::{Cli, Command, FamilyArg, Format, MethodArg, ModelArgs, NumericArgs, Reference, RegimeArg, SGrid, XGrid};
use crate::output::{Cell, Table};
use crate::CliError;

/// Points in the exact undershoot CDF table used as a simulation reference.
const REFERENCE_TABLE_POINTS: usize = 129;
const REFERENCE_TABLE_X_MIN: f64 = 1e-12;

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Runs the parsed command and returns the artifact text.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let fmt = cli.format;
    match &cli.command {
        Command::Coeffs { n } => coeffs(*n, fmt),
        Command::Potential { model, numeric, grid, n, regime } => {
            let m = build_model(model)?;
            let p = inversion_params(&m, numeric)?;
            let xs = x_points(grid, true)?;
            render(potential(&m, &p, numeric, &xs, *n, regime_of(*regime))?, fmt)
        }
        Command::Expansion { model, numeric, grid, n, regime } => {
            let m = build_model(model)?;
            let p = inversion_params(&m, numeric)?;
            let xs = x_points(grid, true)?;
            render(expansion(&m, &p, method_of(numeric.method), &xs, *n, regime_of(*regime))?, fmt)
        }
        Command::Undershoot { model, numeric, levels, grid, order, regime } => {
            let m = build_model(model)?;
            let p = inversion_params(&m, numeric)?;
            let ss = s_points(levels)?;
            let xs = x_points(grid, false)?;
            render(undershoot(&m, &p, method_of(numeric.method), &ss, &xs, *order, regime_of(*regime))?, fmt)
        }
        Command::Interval { model, numeric, levels, lo, hi } => {
            let m = build_model(model)?;
            let p = inversion_params(&m, numeric)?;
            let ss = s_points(levels)?;
            render(interval(&m, &p, method_of(numeric.method), &ss, *lo, *hi)?, fmt)
        }
        Command::CheckLaplace { model, numeric, lambda, x_max, tol } => {
            let m = build_model(model)?;
            let p = inversion_params(&m, numeric)?;
            render(check_laplace(&m, &p, method_of(numeric.method), lambda, *x_max, *tol)?, fmt)
        }
        Command::Simulate { model, numeric, level, step, n, seed, workers, reference } => {
            let m = build_model(model)?;
            let p = inversion_params(&m, numeric)?;
            let sim = SimRequest {
                level: *level,
                step: *step,
                n: *n,
                seed: *seed,
                workers: *workers,
                reference: *reference,
            };
            simulate(&m, &p, method_of(numeric.method), &sim, fmt)
        }
        Command::Rate { model, numeric, levels, n, regime, lo, hi, grid_points, tol } => {
            let m = build_model(model)?;
            let p = inversion_params(&m, numeric)?;
            let ss = s_points(levels)?;
            let req = RateRequest {
                n: *n,
                regime: regime_of(*regime),
                lo: *lo,
                hi: *hi,
                grid_points: *grid_points,
                tol: *tol,
            };
            rate(&m, &p, method_of(numeric.method), &ss, &req, fmt)
        }
    }
}

fn render(t: Table, fmt: Format) -> CliResult<String> {
    Ok(match fmt {
        Format::Csv => t.to_csv(),
        Format::Json => json_text(&t.to_json_rows()),
    })
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- inputs

fn parse_params(text: &str) -> CliResult<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--params: expected name=value, got `{item}`")))?;
        let k = k.trim().to_ascii_lowercase();
        if !matches!(k.as_str(), "c1" | "c2" | "alpha" | "beta") {
            return Err(usage(format!("--params: unknown parameter `{k}`")));
        }
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| usage(format!("--params: `{k}` is not a number: `{}`", v.trim())))?;
        out.insert(k, v);
    }
    Ok(out)
}

pub(crate) fn build_model(a: &ModelArgs) -> CliResult<ExponentModel> {
    let family = a.family.ok_or_else(|| usage("--family is required"))?;
    let mut p = match &a.params {
        Some(t) => parse_params(t)?,
        None => BTreeMap::new(),
    };
    for (k, v) in [("c1", a.c1), ("c2", a.c2), ("alpha", a.alpha), ("beta", a.beta)] {
        if let Some(v) = v {
            p.insert(k.to_string(), v);
        }
    }
    let allowed: &[&str] = match family {
        FamilyArg::StableSum => &["c1", "c2", "alpha", "beta"],
        FamilyArg::Geometric => &["alpha"],
        FamilyArg::StablePlusGeometric => &["alpha", "beta"],
    };
    if let Some(k) = p.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(usage(format!("--{k} is not a parameter of the {} family", family_name(family))));
    }
    let need = |k: &str| p.get(k).copied().ok_or_else(|| usage(format!("--{k} is required for the {} family", family_name(family))));
    let m = match family {
        FamilyArg::StableSum => ExponentModel::stable_sum(
            p.get("c1").copied().unwrap_or(1.0),
            p.get("c2").copied().unwrap_or(1.0),
            need("alpha")?,
            need("beta")?,
        ),
        FamilyArg::Geometric => ExponentModel::geometric(need("alpha")?),
        FamilyArg::StablePlusGeometric => ExponentModel::stable_plus_geometric(need("alpha")?, need("beta")?),
    };
    m.map_err(CliError::from_input)
}

fn family_name(f: FamilyArg) -> &'static str {
    match f {
        FamilyArg::StableSum => "stable-sum",
        FamilyArg::Geometric => "geometric",
        FamilyArg::StablePlusGeometric => "stable-plus-geometric",
    }
}

fn inversion_params(m: &ExponentModel, a: &NumericArgs) -> CliResult<InversionParams> {
    let mut p = InversionParams::for_model(m);
    if let Some(n) = a.inversion_order {
        p = p.with_order(m, n);
    }
    if let Some(v) = a.abs_tol {
        p.abs_tol = v;
    }
    if let Some(v) = a.rel_tol {
        p.rel_tol = v;
    }
    if let Some(v) = a.max_panels {
        p.max_panels = v;
    }
    p.check_symmetry = a.check_symmetry;
    p.validate().map_err(CliError::from_input)?;
    Ok(p)
}

fn method_of(m: MethodArg) -> Method {
    match m {
        MethodArg::Auto => Method::Auto,
        MethodArg::ClosedForm => Method::ClosedForm,
        MethodArg::Inversion => Method::Inversion,
    }
}

fn regime_of(r: RegimeArg) -> Regime {
    match r {
        RegimeArg::Long => Regime::LongRange,
        RegimeArg::Short => Regime::ShortRange,
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::LongRange => "long",
        Regime::ShortRange => "short",
    }
}

/// `lo:hi:count`, spaced in `log` when `log` is set.
fn parse_range(flag: &str, text: &str, log: bool) -> CliResult<Vec<f64>> {
    let bad = || usage(format!("--{flag}: expected LO:HI:COUNT, got `{text}`"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let [lo, hi, count] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi || count == 0 || (count == 1 && lo != hi) {
        return Err(usage(format!("--{flag}: need finite LO <= HI and COUNT >= 2, got `{text}`")));
    }
    if log && lo <= 0.0 {
        return Err(usage(format!("--{flag}: a log-spaced range needs LO > 0, got `{text}`")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let t = i as f64 / last;
            if i + 1 == count {
                hi
            } else if log {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect())
}

fn x_points(g: &XGrid, log: bool) -> CliResult<Vec<f64>> {
    let mut xs = g.x.clone();
    if let Some(r) = &g.x_range {
        xs.extend(parse_range("x-range", r, log)?);
    }
    if xs.is_empty() {
        return Err(usage("--x or --x-range is required"));
    }
    Ok(xs)
}

fn s_points(g: &SGrid) -> CliResult<Vec<f64>> {
    let mut ss = g.s.clone();
    if let Some(r) = &g.s_range {
        ss.extend(parse_range("s-range", r, true)?);
    }
    if ss.is_empty() {
        return Err(usage("--s or --s-range is required"));
    }
    if let Some(s) = ss.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(usage(format!("--s: levels must be positive and finite, got {s}")));
    }
    Ok(ss)
}

fn params_json(m: &ExponentModel) -> Value {
    let mut v = serde_json::to_value(m.family()).expect("family serializes");
    if let Value::Object(o) = &mut v {
        o.remove("family");
    }
    v
}

// -------------------------------------------------------------- commands

fn coeffs(n: i64, fmt: Format) -> CliResult<String> {
    let c = laurent_coeffs(n).map_err(CliError::from_input)?;
    let entries = c.entries();
    if fmt == Format::Json {
        return Ok(json_text(&serde_json::to_value(&entries).expect("entries serialize")));
    }
    // Exact rationals stay as text.
    let mut t = Table::new(["k", "numerator", "denominator"]);
    for e in entries {
        t.push(vec![Cell::Int(e.k), Cell::Text(e.numerator), Cell::Text(e.denominator)]);
    }
    Ok(t.to_csv())
}

/// The expansion series, or `None` when the family has none in this regime.
fn series_if_any(m: &ExponentModel, n: usize, regime: Regime) -> CliResult<Option<arcsine_core::ExpansionSeries>> {
    let r = match regime {
        Regime::LongRange => expansion_series_long(m, n),
        Regime::ShortRange => expansion_series_short(m, n),
    };
    match r {
        Ok(s) => Ok(Some(s)),
        Err(CoreError::Unsupported(msg)) => {
            log::warn!("{msg}; leaving the expansion column empty");
            Ok(None)
        }
        Err(e) => Err(CliError::from_input(e)),
    }
}

fn potential(
    m: &ExponentModel,
    p: &InversionParams,
    a: &NumericArgs,
    xs: &[f64],
    n: usize,
    regime: Regime,
) -> CliResult<Table> {
    let series = series_if_any(m, n, regime)?;
    let closed = matches!(m.family(), Family::StableSum { .. });
    let mut header = vec![
        "x".to_string(),
        "u_fourier".into(),
        "u_closed".into(),
        format!("u_expansion_n{n}"),
        "err_estimate".into(),
    ];
    if a.check_symmetry {
        header.push("imag_residue".into());
    }
    let mut t = Table::new(header);
    for &x in xs {
        let f = potential_density_fourier(m, x, p).map_err(CliError::from_input)?;
        let u_closed = if closed {
            Some(potential_density_closed(m, x).map_err(CliError::from_input)?)
        } else {
            None
        };
        let mut row = vec![
            Cell::Float(x),
            Cell::Float(f.value),
            u_closed.into(),
            series.as_ref().map(|s| eval_expansion(s, x)).into(),
            Cell::Float(f.abs_err),
        ];
        if a.check_symmetry {
            row.push(f.imag_residue.into());
        }
        t.push(row);
    }
    Ok(t)
}

fn expansion(
    m: &ExponentModel,
    p: &InversionParams,
    method: Method,
    xs: &[f64],
    n: usize,
    regime: Regime,
) -> CliResult<Table> {
    let series = match regime {
        Regime::LongRange => expansion_series_long(m, n),
        Regime::ShortRange => expansion_series_short(m, n),
    }
    .map_err(CliError::from_input)?;
    let mut t = Table::new(["x", "u", "expansion", "remainder", "remainder_exponent"]);
    for &x in xs {
        let u = potential_density(m, x, p, method).map_err(CliError::from_input)?.value;
        let e = eval_expansion(&series, x);
        t.push(vec![
            Cell::Float(x),
            Cell::Float(u),
            Cell::Float(e),
            Cell::Float(u - e),
            Cell::Float(series.remainder_exponent),
        ]);
    }
    Ok(t)
}

fn undershoot(
    m: &ExponentModel,
    p: &InversionParams,
    method: Method,
    ss: &[f64],
    xs: &[f64],
    order: usize,
    regime: Regime,
) -> CliResult<Table> {
    let mut header = vec!["s".to_string(), "x".into(), "density".into()];
    header.extend((0..=order).map(|k| format!("approx_n{k}")));
    header.push("abs_err".into());
    let mut t = Table::new(header);
    for &s in ss {
        for &x in xs {
            let d = undershoot_density(m, s, x, p, method).map_err(CliError::from_input)?;
            let mut row = vec![Cell::Float(s), Cell::Float(x), Cell::Float(d)];
            for k in 0..=order {
                let v = undershoot_approx(m, s, x, k, regime).map_err(CliError::from_input)?;
                row.push(Cell::Float(v));
            }
            // error of u propagated through s·Π(s(1-x))·u(sx)
            let u = potential_density(m, s * x, p, method)?;
            row.push(Cell::Float(s * m.levy_tail(s * (1.0 - x))? * u.abs_err));
            t.push(row);
        }
    }
    Ok(t)
}

fn interval(m: &ExponentModel, p: &InversionParams, method: Method, ss: &[f64], lo: f64, hi: f64) -> CliResult<Table> {
    let (rho, _) = long_range_leading(m);
    let beta = beta_cdf(rho, hi)? - beta_cdf(rho, lo)?;
    let mut t = Table::new(["s", "x_lo", "x_hi", "prob", "beta_prob"]);
    for &s in ss {
        let v = interval_prob(m, s, lo, hi, p, method).map_err(|e| relabel(e, "lo/--hi"))?;
        t.push(vec![Cell::Float(s), Cell::Float(lo), Cell::Float(hi), Cell::Float(v), Cell::Float(beta)]);
    }
    Ok(t)
}

fn check_laplace(
    m: &ExponentModel,
    p: &InversionParams,
    method: Method,
    lambdas: &[f64],
    x_max: f64,
    tol: f64,
) -> CliResult<Table> {
    let mut t = Table::new(["lambda", "x_max", "lhs", "rhs", "abs_diff", "tail_bound", "quad_err", "pass"]);
    for &l in lambdas {
        let c = laplace_check(m, l, x_max, p, method).map_err(CliError::from_input)?;
        let diff = (c.lhs - c.rhs).abs();
        t.push(vec![
            Cell::Float(l),
            Cell::Float(x_max),
            Cell::Float(c.lhs),
            Cell::Float(c.rhs),
            Cell::Float(diff),
            Cell::Float(c.tail_bound),
            Cell::Float(c.quad_err),
            Cell::Bool(diff <= c.tail_bound + tol),
        ]);
    }
    Ok(t)
}

struct SimRequest {
    level: f64,
    step: Option<f64>,
    n: usize,
    seed: u64,
    workers: usize,
    reference: Reference,
}

fn simulate(m: &ExponentModel, p: &InversionParams, method: Method, r: &SimRequest, fmt: Format) -> CliResult<String> {
    if r.workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    if r.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let mut cfg = SimConfig::new(*m, r.level, r.n, r.seed)
        .map_err(CliError::from_input)?
        .with_workers(r.workers);
    if let Some(step) = r.step {
        cfg = cfg.with_step(step);
        cfg.validate().map_err(CliError::from_input)?;
    }
    let set = simulate_undershoot(&cfg)?;
    if fmt == Format::Csv {
        let mut t = Table::new(["index", "x"]);
        for (i, &v) in set.values.iter().enumerate() {
            t.push(vec![Cell::Int(i as i64), Cell::Float(v)]);
        }
        return Ok(t.to_csv());
    }
    let (ks, reference) = match r.reference {
        Reference::Beta => {
            let (rho, _) = long_range_leading(m);
            let ks = set.ks_statistic(|x| beta_cdf(rho, x).unwrap_or(f64::NAN))?;
            (ks, json!({"kind": "beta", "alpha": rho}))
        }
        Reference::Exact => {
            let table = undershoot_cdf_table(m, r.level, REFERENCE_TABLE_POINTS, REFERENCE_TABLE_X_MIN, p, method)?;
            (set.ks_statistic(|x| table.eval(x))?, json!({"kind": "exact", "level": r.level}))
        }
    };
    Ok(json_text(&json!({
        "family": m.family().name(),
        "params": params_json(m),
        "level": cfg.level,
        "step": cfg.step,
        "n": cfg.n_samples,
        "seed": cfg.seed,
        "mean": set.mean(),
        "mean_last_step": set.mean_last_step,
        "reference": reference,
        "ks": ks,
        "histogram": set.histogram(),
    })))
}

/// Reports an invalid-parameter error against `flag`.
fn relabel(e: CoreError, flag: &str) -> CliError {
    match &e {
        CoreError::InvalidParameter { .. } => usage(format!("--{flag}: {e}")),
        _ => CliError::Numeric(e),
    }
}

struct RateRequest {
    n: usize,
    regime: Regime,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
}

fn rate(m: &ExponentModel, p: &InversionParams, method: Method, ss: &[f64], r: &RateRequest, fmt: Format) -> CliResult<String> {
    let predicted = remainder_exponent(m, r.n, r.regime).map_err(CliError::from_input)?;
    let mut points = Vec::with_capacity(ss.len());
    for &s in ss {
        let e = sup_error(m, s, r.lo, r.hi, r.n, r.regime, r.grid_points, p, method).map_err(CliError::from_input)?;
        points.push((s, e));
    }
    if fmt == Format::Csv {
        let mut t = Table::new(["s", "sup_error"]);
        for &(s, e) in &points {
            t.push(vec![Cell::Float(s), Cell::Float(e)]);
        }
        return Ok(t.to_csv());
    }
    // The stable-plus-geometric short-range remainder carries a |log s| factor.
    let log_factor = matches!(m.family(), Family::StablePlusGeometric { .. }) && r.regime == Regime::ShortRange;
    let fit = if log_factor {
        estimate_rate_log(&points, predicted, r.tol)
    } else {
        estimate_rate(&points, predicted, r.tol)
    }
    .map_err(|e| relabel(e, "s"))?;
    Ok(json_text(&json!({
        "family": m.family().name(),
        "params": params_json(m),
        "regime": regime_name(r.regime),
        "n": r.n,
        "points": points.iter().map(|&(s, e)| json!({"s": s, "sup_error": e})).collect::<Vec<_>>(),
        "log_factor": log_factor,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "stderr": fit.stderr,
        "predicted": fit.predicted,
        "tol": fit.tol,
        "pass": fit.pass,
        "pass_bound": fit.pass_bound,
    })))
}
