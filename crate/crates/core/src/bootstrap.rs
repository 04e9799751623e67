//! Bootstrap-t and bootstrap-calibrated EL (BCEL) intervals.
//!
//! Outer replicate `b` draws from [`replicate_stream`]`(seed, b)`; the inner
//! resamples of the bootstrap-t procedure continue on the same stream. Runs
//! with equal inputs are bit-for-bit identical under either [`Execution`].
//!
//! Sample quantiles use the order statistic at 1-based position
//! `ceil(q * B)` of the `B` sorted replicate values.

use rand::Rng;

use crate::el::{check_level, el_log_ratio, el_region, el_root};
use crate::error::{Error, Result};
use crate::estimators::{order_statistic_estimate, plug_in_relative, ustat_weights};
use crate::exec::{map_indices, Execution};
use crate::interval::{IntervalResult, Method};
use crate::rng::{replicate_stream, StreamRng};
use crate::sample::{SGiniOrder, Sample};

/// Largest fraction of replicates that may be discarded before an interval
/// is refused.
pub const MAX_DROPPED_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub outer_b: usize,
    /// Second-level resamples per outer replicate (bootstrap-t only).
    pub inner_b: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            outer_b: 1000,
            inner_b: 50,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

impl BootstrapConfig {
    pub fn new(outer_b: usize, inner_b: usize, seed: u64) -> Self {
        Self {
            outer_b,
            inner_b,
            seed,
            ..Self::default()
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self, method: Method) -> Result<()> {
        if self.outer_b < 2 {
            return Err(Error::ParameterDomain(format!(
                "outer bootstrap size must be >= 2 (got {})",
                self.outer_b
            )));
        }
        if method == Method::BootT && self.inner_b < 2 {
            return Err(Error::ParameterDomain(format!(
                "inner bootstrap size must be >= 2 (got {})",
                self.inner_b
            )));
        }
        Ok(())
    }
}

/// Order statistic at 1-based position `ceil(q * len)` of an ascending slice.
pub fn sample_quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty slice");
    let len = sorted.len();
    // the small offset keeps q * len from rounding just above an integer
    let pos = (q * len as f64 - 1e-9).ceil().clamp(1.0, len as f64) as usize;
    sorted[pos - 1]
}

fn draw_sorted(source: &[f64], rng: &mut StreamRng, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..source.len()).map(|_| source[rng.random_range(0..source.len())]));
    out.sort_by(f64::total_cmp);
}

fn relative_from_sorted(sorted: &[f64], weights: &[f64]) -> f64 {
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    order_statistic_estimate(sorted, weights.iter().copied()) / mean
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn too_many_dropped(dropped: usize, total: usize) -> bool {
    dropped as f64 > MAX_DROPPED_FRACTION * total as f64
}

/// Bootstrap-calibrated EL interval.
///
/// Each resample's EL log-ratio, computed with the resample's own empirical
/// survival function, is evaluated at the full-sample plug-in estimate. The
/// `level` sample quantile of those ratios replaces the chi-square critical
/// value in `{R : L(R) <= I}`.
pub fn bcel_interval(
    sample: &Sample,
    order: SGiniOrder,
    level: f64,
    config: &BootstrapConfig,
) -> Result<IntervalResult> {
    check_level(level)?;
    config.validate(Method::Bcel)?;
    let nu = order.nu();
    let root = el_root(sample, order)?;
    let target = plug_in_relative(sample, order);
    let n = sample.len();

    let ratios: Vec<Option<f64>> = map_indices(config.execution, config.outer_b, |b| {
        let mut rng = replicate_stream(config.seed, b as u64);
        let resample = sample.resample((0..n).map(|_| rng.random_range(0..n)));
        if resample.is_constant() {
            return None;
        }
        Some(el_log_ratio(&resample, order, target).expect("order validated by el_root"))
    });
    let dropped = ratios.iter().filter(|r| r.is_none()).count();
    if too_many_dropped(dropped, config.outer_b) {
        return Err(Error::Calibration(format!(
            "{dropped} of {} BCEL resamples were constant",
            config.outer_b
        )));
    }
    let mut sorted: Vec<f64> = ratios
        .into_iter()
        .map(|r| r.unwrap_or(f64::INFINITY))
        .collect();
    sorted.sort_by(f64::total_cmp);
    let critical = sample_quantile(&sorted, level);

    let mut ci = el_region(sample, nu, root, critical, Method::Bcel, level);
    ci.diagnostics.dropped_replicates = dropped;
    ci.diagnostics.replicates = config.outer_b;
    Ok(ci)
}

/// Studentized bootstrap interval around the U-statistic estimate.
///
/// `(R - T_{1-a/2} se, R - T_{a/2} se)` where `se` is the standard deviation
/// of the outer replicates and `T_b = (R_b - R) / se_b` uses an inner
/// bootstrap for `se_b`. Replicates with a zero inner standard error are
/// dropped.
pub fn boot_t_interval(
    sample: &Sample,
    order: SGiniOrder,
    level: f64,
    config: &BootstrapConfig,
) -> Result<IntervalResult> {
    check_level(level)?;
    config.validate(Method::BootT)?;
    let nu = order.integer()?;
    let n = sample.len();
    if n <= nu {
        return Err(Error::InsufficientSample {
            needed: nu + 1,
            got: n,
        });
    }
    let weights = ustat_weights(n, nu);
    let estimate = relative_from_sorted(sample.sorted(), &weights);
    let values = sample.values();

    let replicates: Vec<(f64, f64)> = map_indices(config.execution, config.outer_b, |b| {
        let mut rng = replicate_stream(config.seed, b as u64);
        let mut outer = Vec::with_capacity(n);
        draw_sorted(values, &mut rng, &mut outer);
        let r_b = relative_from_sorted(&outer, &weights);
        let mut inner = Vec::with_capacity(n);
        let inner_estimates: Vec<f64> = (0..config.inner_b)
            .map(|_| {
                draw_sorted(&outer, &mut rng, &mut inner);
                relative_from_sorted(&inner, &weights)
            })
            .collect();
        (r_b, std_dev(&inner_estimates))
    });

    let outer_estimates: Vec<f64> = replicates.iter().map(|r| r.0).collect();
    let se = std_dev(&outer_estimates);
    if !(se > 0.0 && se.is_finite()) {
        return Err(Error::Calibration(
            "bootstrap standard error is zero; every resample gave the same estimate".into(),
        ));
    }
    let mut t: Vec<f64> = replicates
        .iter()
        .filter(|(_, se_b)| *se_b > 0.0 && se_b.is_finite())
        .map(|(r_b, se_b)| (r_b - estimate) / se_b)
        .collect();
    let dropped = config.outer_b - t.len();
    if too_many_dropped(dropped, config.outer_b) {
        return Err(Error::Calibration(format!(
            "{dropped} of {} bootstrap-t replicates had zero inner standard error",
            config.outer_b
        )));
    }
    t.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    let t_low = sample_quantile(&t, alpha / 2.0);
    let t_high = sample_quantile(&t, 1.0 - alpha / 2.0);

    Ok(IntervalResult {
        lower: estimate - t_high * se,
        upper: estimate - t_low * se,
        method: Method::BootT,
        level,
        diagnostics: crate::interval::Diagnostics {
            center: estimate,
            dropped_replicates: dropped,
            replicates: config.outer_b,
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::ustat_relative;

    fn fixture() -> Sample {
        Sample::new(vec![
            0.8, 1.9, 0.3, 4.2, 1.1, 2.6, 0.7, 1.4, 0.2, 3.3, 0.9, 1.6, 2.1, 0.5, 5.7, 1.2, 0.4,
            2.9, 1.0, 0.6,
        ])
        .unwrap()
    }

    fn nu3() -> SGiniOrder {
        SGiniOrder::new(3.0).unwrap()
    }

    #[test]
    fn quantile_convention() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(sample_quantile(&v, 0.95), 10.0);
        assert_eq!(sample_quantile(&v, 0.5), 5.0);
        assert_eq!(sample_quantile(&v, 0.05), 1.0);
        assert_eq!(sample_quantile(&v, 0.0), 1.0);
        let w: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(sample_quantile(&w, 0.95), 950.0);
        assert_eq!(sample_quantile(&w, 0.025), 25.0);
    }

    #[test]
    fn config_validation() {
        assert!(BootstrapConfig::new(1, 10, 0)
            .validate(Method::Bcel)
            .is_err());
        assert!(BootstrapConfig::new(10, 1, 0)
            .validate(Method::BootT)
            .is_err());
        assert!(BootstrapConfig::new(10, 1, 0)
            .validate(Method::Bcel)
            .is_ok());
    }

    #[test]
    fn bcel_is_reproducible_and_contains_root() {
        let cfg = BootstrapConfig::new(200, 10, 42);
        let a = bcel_interval(&fixture(), nu3(), 0.95, &cfg).unwrap();
        let b = bcel_interval(
            &fixture(),
            nu3(),
            0.95,
            &cfg.with_execution(Execution::Sequential),
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(a.contains(a.diagnostics.center));
        let wider = bcel_interval(&fixture(), nu3(), 0.99, &cfg).unwrap();
        assert!(wider.lower <= a.lower && wider.upper >= a.upper);
    }

    #[test]
    fn boot_t_is_reproducible() {
        let cfg = BootstrapConfig::new(200, 20, 9);
        let a = boot_t_interval(&fixture(), nu3(), 0.95, &cfg).unwrap();
        let b = boot_t_interval(
            &fixture(),
            nu3(),
            0.95,
            &cfg.with_execution(Execution::Sequential),
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.diagnostics.center,
            ustat_relative(&fixture(), nu3()).unwrap()
        );
        assert!(a.lower.is_finite() && a.upper.is_finite() && a.lower < a.upper);
        let other =
            boot_t_interval(&fixture(), nu3(), 0.95, &BootstrapConfig::new(200, 20, 10)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn constant_sample_fails_calibration() {
        let constant = Sample::new(vec![3.0; 12]).unwrap();
        let cfg = BootstrapConfig::new(50, 5, 1);
        assert!(matches!(
            boot_t_interval(&constant, nu3(), 0.95, &cfg),
            Err(Error::Calibration(_))
        ));
        assert!(matches!(
            bcel_interval(&constant, nu3(), 0.95, &cfg),
            Err(Error::Calibration(_))
        ));
    }

    #[test]
    fn boot_t_needs_integer_order() {
        let cfg = BootstrapConfig::new(20, 5, 1);
        let r = boot_t_interval(&fixture(), SGiniOrder::new(2.5).unwrap(), 0.95, &cfg);
        assert!(matches!(r, Err(Error::ParameterDomain(_))));
    }
}
