//! Numerics for killed subordinators: potential densities, their asymptotic
//! expansions, undershoot (Dynkin–Lamperti) laws, and Monte Carlo checks.

// `!(x > 0.0)` is the NaN-rejecting domain check used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponent;
pub mod montecarlo;
pub mod potential;
pub mod quad;
pub mod rate;
pub mod special;
pub mod undershoot;

pub use error::{Error, Result};
pub use exponent::{ExponentModel, Family, N_MAX};
pub use potential::{DensityEval, Evaluator, ExpansionSeries, InversionParams, Method, Regime};
