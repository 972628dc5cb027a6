use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "arcsine",
    version,
    about = "Potential densities, expansions and undershoot laws of subordinators",
    args_override_self = true
)]
pub struct Cli {
    /// Flat `key = value` file mirroring the long flags; flags given on the
    /// command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the artifact here instead of standard output.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    StableSum,
    Geometric,
    StablePlusGeometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    ClosedForm,
    Inversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Long,
    Short,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reference {
    /// Beta(ρ, 1-ρ) with ρ the long-range index.
    Beta,
    /// The exact undershoot law at the simulated level.
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Comma-separated `name=value` parameters, e.g. `c1=1,c2=1,alpha=0.3,beta=0.7`.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    /// Derivative order N of the Fourier inversion (default per family).
    #[arg(long, value_name = "N")]
    pub inversion_order: Option<usize>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub max_panels: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Also integrate the negative frequency half-line and report the
    /// imaginary residue.
    #[arg(long)]
    pub check_symmetry: bool,
}

#[derive(Debug, Clone, Args)]
pub struct XGrid {
    /// Evaluation points (comma-separated).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub x: Vec<f64>,
    /// `lo:hi:count` grid.
    #[arg(long, value_name = "LO:HI:COUNT")]
    pub x_range: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SGrid {
    /// Passage levels (comma-separated).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub s: Vec<f64>,
    /// `lo:hi:count` grid, evenly spaced in `log s`.
    #[arg(long, value_name = "LO:HI:COUNT")]
    pub s_range: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Potential density u(x).
    Potential {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        numeric: NumericArgs,
        /// Points; `--x-range` is spaced evenly in `log x`.
        #[command(flatten)]
        grid: XGrid,
        /// Correction terms in the `u_expansion` column.
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, value_enum, default_value_t = RegimeArg::Long)]
        regime: RegimeArg,
    },
    /// Undershoot density of X_{T(s)-}/s and its approximations.
    Undershoot {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        numeric: NumericArgs,
        #[command(flatten)]
        levels: SGrid,
        /// Points in (0,1); `--x-range` is spaced evenly.
        #[command(flatten)]
        grid: XGrid,
        /// Highest correction order K; columns approx_n0..approx_nK.
        #[arg(long, default_value_t = 0)]
        order: usize,
        #[arg(long, value_enum, default_value_t = RegimeArg::Long)]
        regime: RegimeArg,
    },
    /// Probability that X_{T(s)-}/s falls in [lo, hi].
    Interval {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        numeric: NumericArgs,
        #[command(flatten)]
        levels: SGrid,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
    },
    /// Asymptotic expansion of u at infinity (long) or zero (short).
    Expansion {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        numeric: NumericArgs,
        /// Points; `--x-range` is spaced evenly in `log x`.
        #[command(flatten)]
        grid: XGrid,
        /// Number of correction terms.
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, value_enum, default_value_t = RegimeArg::Long)]
        regime: RegimeArg,
    },
    /// Exact Laurent coefficients b_{-1}..b_n of 1/log(1+z).
    Coeffs {
        #[arg(long)]
        n: i64,
    },
    /// Compare the Laplace transform of u with 1/Φ.
    CheckLaplace {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [0.5, 1.0, 2.0, 4.0])]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 1e3)]
        x_max: f64,
        /// Allowed excess over the tail bound.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Simulate first-passage undershoots on a time skeleton.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long)]
        level: f64,
        /// Skeleton step (default: increments of typical size level/500).
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "ARCSINE_WORKERS", default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = Reference::Beta)]
        reference: Reference,
    },
    /// Fit the decay exponent of the undershoot approximation error.
    Rate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        numeric: NumericArgs,
        #[command(flatten)]
        levels: SGrid,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, value_enum, default_value_t = RegimeArg::Long)]
        regime: RegimeArg,
        #[arg(long, default_value_t = 0.2)]
        lo: f64,
        #[arg(long, default_value_t = 0.8)]
        hi: f64,
        #[arg(long, default_value_t = 33)]
        grid_points: usize,
        #[arg(long, default_value_t = 0.15)]
        tol: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Potential { .. } => "potential",
            Command::Undershoot { .. } => "undershoot",
            Command::Interval { .. } => "interval",
            Command::Expansion { .. } => "expansion",
            Command::Coeffs { .. } => "coeffs",
            Command::CheckLaplace { .. } => "check-laplace",
            Command::Simulate { .. } => "simulate",
            Command::Rate { .. } => "rate",
        }
    }
}

pub const SUBCOMMANDS: [&str; 8] = [
    "potential",
    "undershoot",
    "interval",
    "expansion",
    "coeffs",
    "check-laplace",
    "simulate",
    "rate",
];
