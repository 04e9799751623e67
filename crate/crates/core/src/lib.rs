//! Estimation and interval inference for the S-Gini family of inequality
//! indices.
//!
//! The crate covers:
//!
//! - point estimates of the absolute and relative S-Gini index, via the
//!   plug-in order-statistic formula and via an unbiased U-statistic
//!   ([`estimators`]);
//! - empirical-likelihood (EL) intervals built from the ratio estimating
//!   equation ([`el`]);
//! - jackknife empirical likelihood (JEL) intervals and tests ([`jel`]);
//! - bootstrap-t and bootstrap-calibrated EL intervals ([`bootstrap`]);
//! - a Monte-Carlo harness for coverage, type-1 error and power
//!   ([`simulation`]).
//!
//! Replicate loops (bootstrap resamples, Monte-Carlo runs) go through
//! [`exec::map_indices`], which uses rayon when the `parallel` feature is
//! enabled and a plain loop otherwise. Every replicate draws from its own
//! derived random stream ([`rng`]), so results do not depend on scheduling.

pub mod bootstrap;
pub mod cli;
pub mod data;
pub mod el;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod interval;
pub mod jel;
pub mod quadrature;
pub mod rng;
pub mod sample;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};
pub use interval::{IntervalResult, Method};
pub use sample::{SGiniOrder, Sample};

/// Builds a confidence interval for the relative index with any method.
/// `bootstrap` is only read by the two bootstrap methods.
pub fn confidence_interval(
    sample: &Sample,
    order: SGiniOrder,
    level: f64,
    method: Method,
    bootstrap: &bootstrap::BootstrapConfig,
) -> Result<IntervalResult> {
    match method {
        Method::El => el::el_interval(sample, order, level),
        Method::Jel => jel::jel_interval(sample, order, level),
        Method::BootT => bootstrap::boot_t_interval(sample, order, level, bootstrap),
        Method::Bcel => bootstrap::bcel_interval(sample, order, level, bootstrap),
    }
}
