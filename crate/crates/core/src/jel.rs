//! Jackknife empirical likelihood for the relative S-Gini index.
//!
//! The estimating function `R * mean - S_hat` is linear in the candidate `R`,
//! so each jackknife pseudo-value is affine in `R`:
//! `V_k(R) = R x_k - w_k` with `w_k = n S_hat - (n-1) S_hat(-k)`. The
//! leave-one-out statistics are computed once and every candidate costs a
//! single `O(n)` Lagrange solve.

use serde::{Deserialize, Serialize};

use crate::el::{check_level, log_ratio_from_values};
use crate::error::{Error, Result};
use crate::estimators::{ustat_absolute_sorted, ustat_weights};
use crate::interval::{profile_interval, Diagnostics, IntervalResult, Method};
use crate::sample::{SGiniOrder, Sample};
use crate::special::{chi2_quantile, chi2_sf};

fn check(sample: &Sample, order: SGiniOrder) -> Result<usize> {
    let nu = order.integer()?;
    if sample.len() <= nu {
        return Err(Error::InsufficientSample {
            needed: nu + 1,
            got: sample.len(),
        });
    }
    Ok(nu)
}

fn loo_sorted(sorted: &[f64], nu: usize) -> Vec<f64> {
    let n = sorted.len();
    let shift = sorted[0];
    let y: Vec<f64> = sorted.iter().map(|x| x - shift).collect();
    let total: f64 = y.iter().sum();
    let w = ustat_weights(n - 1, nu);

    // prefix[r] = Σ_{i<r} w_i y_i, suffix[r] = Σ_{i>=r} w_i y_{i+1}
    let mut prefix = vec![0.0; n];
    for r in 1..n {
        prefix[r] = prefix[r - 1] + w[r - 1] * y[r - 1];
    }
    let mut suffix = vec![0.0; n];
    for r in (0..n - 1).rev() {
        suffix[r] = suffix[r + 1] + w[r] * y[r + 1];
    }
    (0..n)
        .map(|r| (total - y[r]) / (n - 1) as f64 - prefix[r] - suffix[r])
        .collect()
}

/// Leave-one-out U-statistics `S_hat(-k)`, in original observation order.
pub fn loo_ustats(sample: &Sample, order: SGiniOrder) -> Result<Vec<f64>> {
    let nu = check(sample, order)?;
    let by_rank = loo_sorted(sample.sorted(), nu);
    let mut out = vec![0.0; sample.len()];
    for (r, &i) in sample.order().iter().enumerate() {
        out[i] = by_rank[r];
    }
    Ok(out)
}

/// The candidate-independent part of the pseudo-values.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoValueProfile {
    /// `w_k = n S_hat - (n-1) S_hat(-k)`.
    pub w: Vec<f64>,
    pub xs: Vec<f64>,
    pub nu: usize,
    /// Full-sample U-statistic `S_hat`.
    pub s_hat: f64,
    pub mean: f64,
}

impl PseudoValueProfile {
    pub fn new(sample: &Sample, order: SGiniOrder) -> Result<Self> {
        let nu = check(sample, order)?;
        let n = sample.len() as f64;
        let s_hat = ustat_absolute_sorted(sample.sorted(), nu);
        let w = loo_ustats(sample, order)?
            .into_iter()
            .map(|loo| n * s_hat - (n - 1.0) * loo)
            .collect();
        Ok(Self {
            w,
            xs: sample.values().to_vec(),
            nu,
            s_hat,
            mean: sample.mean(),
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Point estimate `S_hat / mean`, where the log-ratio vanishes.
    pub fn estimate(&self) -> f64 {
        self.s_hat / self.mean
    }

    pub fn pseudo_values(&self, candidate: f64) -> Vec<f64> {
        self.xs
            .iter()
            .zip(&self.w)
            .map(|(x, w)| candidate * x - w)
            .collect()
    }

    pub fn log_ratio(&self, candidate: f64) -> f64 {
        log_ratio_from_values(&self.pseudo_values(candidate))
    }

    /// Zero lies strictly inside the pseudo-value hull exactly for
    /// candidates in this open interval.
    pub fn hull(&self) -> (f64, f64) {
        self.xs
            .iter()
            .zip(&self.w)
            .map(|(x, w)| w / x)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r), hi.max(r))
            })
    }
}

/// Jackknife pseudo-values `V_k(R) = R x_k - w_k`.
pub fn pseudo_values(sample: &Sample, order: SGiniOrder, candidate: f64) -> Result<Vec<f64>> {
    Ok(PseudoValueProfile::new(sample, order)?.pseudo_values(candidate))
}

/// JEL log-ratio `J(R)`; `+∞` when zero is outside the pseudo-value hull.
pub fn jel_log_ratio(sample: &Sample, order: SGiniOrder, candidate: f64) -> Result<f64> {
    Ok(PseudoValueProfile::new(sample, order)?.log_ratio(candidate))
}

/// `{R : J(R) <= χ²₁(level)}`, grown outward from the U-statistic estimate.
pub fn jel_interval(sample: &Sample, order: SGiniOrder, level: f64) -> Result<IntervalResult> {
    check_level(level)?;
    let profile = PseudoValueProfile::new(sample, order)?;
    if sample.is_constant() {
        return Ok(IntervalResult::degenerate(Method::Jel, level));
    }
    Ok(interval_from_profile(&profile, level))
}

pub(crate) fn interval_from_profile(profile: &PseudoValueProfile, level: f64) -> IntervalResult {
    let threshold = chi2_quantile(level, 1.0);
    let center = profile.estimate();
    let p = profile_interval(|r| profile.log_ratio(r), center, profile.hull(), threshold);
    IntervalResult {
        lower: p.lower,
        upper: p.upper,
        method: Method::Jel,
        level,
        diagnostics: Diagnostics {
            center,
            threshold: Some(threshold),
            lower_at_hull: p.lower_at_hull,
            upper_at_hull: p.upper_at_hull,
            ..Diagnostics::default()
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JelTestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub r0: f64,
    /// Significance level.
    pub level: f64,
}

/// JEL test of `R = r0` at significance `level`.
pub fn jel_test(sample: &Sample, order: SGiniOrder, r0: f64, level: f64) -> Result<JelTestResult> {
    if !(0.0..=1.0).contains(&r0) {
        return Err(Error::ParameterDomain(format!(
            "r0 must be in [0, 1] (got {r0})"
        )));
    }
    check_level(level)?;
    let profile = PseudoValueProfile::new(sample, order)?;
    Ok(test_from_profile(&profile, r0, level))
}

pub(crate) fn test_from_profile(
    profile: &PseudoValueProfile,
    r0: f64,
    level: f64,
) -> JelTestResult {
    let statistic = profile.log_ratio(r0);
    let critical = chi2_quantile(1.0 - level, 1.0);
    JelTestResult {
        statistic,
        p_value: chi2_sf(statistic, 1.0),
        reject: statistic > critical,
        r0,
        level,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{ustat_absolute, ustat_brute_force};
    use approx::assert_relative_eq;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    fn nu(v: f64) -> SGiniOrder {
        SGiniOrder::new(v).unwrap()
    }

    fn without(sample: &Sample, k: usize) -> Sample {
        let mut v = sample.values().to_vec();
        v.remove(k);
        Sample::new(v).unwrap()
    }

    #[test]
    fn loo_examples() {
        let got = loo_ustats(&s(&[1.0, 2.0, 3.0]), nu(2.0)).unwrap();
        for (a, b) in got.iter().zip([0.5, 1.0, 0.5]) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(loo_ustats(&s(&[2.0; 5]), nu(3.0)).unwrap(), vec![0.0; 5]);
        let four = s(&[1.0, 2.0, 3.0, 4.0]);
        let got = loo_ustats(&four, nu(2.0)).unwrap();
        for (k, g) in got.iter().enumerate() {
            let oracle = ustat_brute_force(&without(&four, k), nu(2.0)).unwrap();
            assert_relative_eq!(*g, oracle, epsilon = 1e-14);
        }
    }

    #[test]
    fn loo_matches_naive_with_ties() {
        let sample = s(&[3.0, 0.5, 2.0, 3.0, 0.5, 9.0, 1.25, 4.0]);
        for v in 2..=5 {
            let fast = loo_ustats(&sample, nu(v as f64)).unwrap();
            for (k, f) in fast.iter().enumerate() {
                let naive = ustat_absolute(&without(&sample, k), nu(v as f64)).unwrap();
                assert!((f - naive).abs() <= 1e-10 * (1.0 + naive.abs()));
            }
        }
    }

    #[test]
    fn loo_errors() {
        assert_eq!(
            loo_ustats(&s(&[1.0, 2.0, 3.0]), nu(3.0)),
            Err(Error::InsufficientSample { needed: 4, got: 3 })
        );
        assert!(loo_ustats(&s(&[1.0, 2.0, 3.0]), nu(2.5)).is_err());
    }

    #[test]
    fn pseudo_value_examples() {
        let sample = s(&[1.0, 2.0, 3.0]);
        let at_est = pseudo_values(&sample, nu(2.0), 1.0 / 3.0).unwrap();
        for (a, b) in at_est.iter().zip([-2.0 / 3.0, 2.0 / 3.0, 0.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
        let at_zero = pseudo_values(&sample, nu(2.0), 0.0).unwrap();
        for (a, b) in at_zero.iter().zip([-1.0, 0.0, -1.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(
            pseudo_values(&s(&[4.0; 3]), nu(2.0), 0.0).unwrap(),
            vec![0.0; 3]
        );
    }

    #[test]
    fn log_ratio_examples() {
        let sample = s(&[1.0, 2.0, 3.0]);
        assert!(jel_log_ratio(&sample, nu(2.0), 1.0 / 3.0).unwrap() < 1e-14);
        let profile = PseudoValueProfile::new(&sample, nu(2.0)).unwrap();
        let (lo, hi) = profile.hull();
        assert_eq!(profile.log_ratio(hi + 0.1), f64::INFINITY);
        assert_eq!(profile.log_ratio(lo - 0.1), f64::INFINITY);
    }

    #[test]
    fn test_examples() {
        let sample = s(&[0.8, 1.9, 0.3, 4.2, 1.1, 2.6, 0.7, 1.4]);
        let profile = PseudoValueProfile::new(&sample, nu(3.0)).unwrap();
        let at_est = jel_test(&sample, nu(3.0), profile.estimate(), 0.05).unwrap();
        assert!(at_est.statistic < 1e-12);
        assert_relative_eq!(at_est.p_value, 1.0, epsilon = 1e-6);
        assert!(!at_est.reject);

        // {1,2,3} at order 2 has w/x = (1, 0, 1/3): hull (0, 1)
        let edge = jel_test(&s(&[1.0, 2.0, 3.0]), nu(2.0), 0.0, 0.05).unwrap();
        assert_eq!(edge.statistic, f64::INFINITY);
        assert_eq!(edge.p_value, 0.0);
        assert!(edge.reject);

        assert!(jel_test(&sample, nu(3.0), 1.5, 0.05).is_err());
    }

    #[test]
    fn interval_contains_estimate() {
        let sample = s(&[0.8, 1.9, 0.3, 4.2, 1.1, 2.6, 0.7, 1.4, 0.2, 3.3]);
        let ci = jel_interval(&sample, nu(3.0), 0.95).unwrap();
        assert!(ci.contains(ci.diagnostics.center));
        assert!(ci.length() > 0.0);
        let ci = jel_interval(&s(&[2.0; 6]), nu(2.0), 0.95).unwrap();
        assert!(ci.diagnostics.degenerate);
    }
}
