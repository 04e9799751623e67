//! Point estimators of the S-Gini index.
//!
//! Two routes are provided. The plug-in route replaces the survival function
//! by its empirical counterpart and works for any real order. The U-statistic
//! route averages the kernel `(x1 + ... + xv - v * min) / v` over all subsets
//! of size `v`; it is unbiased for the absolute index but needs an integer
//! order. Both are evaluated on order statistics in `O(n log n)`.
//!
//! All closed forms are evaluated on observations shifted by the sample
//! minimum, so a constant sample gives exactly zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{SGiniOrder, Sample};

/// Largest number of subsets [`ustat_brute_force`] will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    PlugIn,
    UStatistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub absolute: f64,
    pub relative: f64,
    pub estimator: Estimator,
}

/// Empirical survival function at each observation, in original order.
///
/// Uses the strictly-greater convention `#{j : x_j > x} / n`, so for
/// distinct data the `i`-th order statistic (1-based) maps to `(n - i) / n`
/// and every copy of the maximum maps to zero.
pub fn empirical_survival_ranks(sample: &Sample) -> Vec<f64> {
    let sorted = sample.sorted();
    let n = sorted.len() as f64;
    sample
        .values()
        .iter()
        .map(|&x| {
            let at_or_below = sorted.partition_point(|&y| y <= x);
            (sorted.len() - at_or_below) as f64 / n
        })
        .collect()
}

/// Same as [`empirical_survival_ranks`] but indexed by sorted position.
pub(crate) fn survival_of_sorted(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    let mut out = vec![0.0; n];
    let mut end = n;
    // walk down from the top so every tie block shares its count
    while end > 0 {
        let value = sorted[end - 1];
        let mut start = end - 1;
        while start > 0 && sorted[start - 1] == value {
            start -= 1;
        }
        let greater = (n - end) as f64 / n as f64;
        out[start..end].iter_mut().for_each(|s| *s = greater);
        end = start;
    }
    out
}

pub(crate) fn order_statistic_estimate(sorted: &[f64], weights: impl Iterator<Item = f64>) -> f64 {
    let n = sorted.len() as f64;
    let shift = sorted[0];
    let centred_mean = sorted.iter().map(|x| x - shift).sum::<f64>() / n;
    let weighted: f64 = sorted
        .iter()
        .zip(weights)
        .map(|(x, w)| w * (x - shift))
        .sum();
    centred_mean - weighted
}

fn plug_in_absolute_sorted(sorted: &[f64], nu: f64) -> f64 {
    let n = sorted.len();
    let nf = n as f64;
    let weights = (1..=n).map(|i| {
        let upper = (n - i + 1) as f64 / nf;
        let lower = (n - i) as f64 / nf;
        upper.powf(nu) - lower.powf(nu)
    });
    order_statistic_estimate(sorted, weights)
}

/// Plug-in estimate of the absolute S-Gini index:
/// `mean - sum_i [((n-i+1)^v - (n-i)^v) / n^v] x_(i)`.
pub fn plug_in_absolute(sample: &Sample, order: SGiniOrder) -> f64 {
    plug_in_absolute_sorted(sample.sorted(), order.nu())
}

/// Plug-in estimate of the relative S-Gini index (absolute over the mean).
pub fn plug_in_relative(sample: &Sample, order: SGiniOrder) -> f64 {
    plug_in_absolute(sample, order) / sample.mean()
}

/// Weights `C(n-i, v-1) / C(n, v)` for `i = 1..=n`, built by the ratio
/// recurrence `w_{i+1} = w_i (n-i-v+1) / (n-i)` starting at `w_1 = v / n`.
pub(crate) fn ustat_weights(n: usize, nu: usize) -> Vec<f64> {
    debug_assert!(n >= nu && nu >= 1);
    let mut w = vec![0.0; n];
    w[0] = nu as f64 / n as f64;
    // weights vanish once fewer than v-1 larger observations remain
    for i in 1..=(n - nu) {
        w[i] = w[i - 1] * (n - i + 1 - nu) as f64 / (n - i) as f64;
    }
    w
}

pub(crate) fn ustat_absolute_sorted(sorted: &[f64], nu: usize) -> f64 {
    let w = ustat_weights(sorted.len(), nu);
    order_statistic_estimate(sorted, w.into_iter())
}

fn check_ustat(sample: &Sample, order: SGiniOrder) -> Result<usize> {
    let nu = order.integer()?;
    if sample.len() < nu {
        return Err(Error::InsufficientSample {
            needed: nu,
            got: sample.len(),
        });
    }
    Ok(nu)
}

/// Unbiased U-statistic estimate of the absolute S-Gini index.
///
/// Evaluates `(1/C(n,v)) { C(n-1,v-1) sum x_i / v - sum_i C(n-i,v-1) x_(i) }`
/// with floating-point weight ratios, so no binomial coefficient is formed.
pub fn ustat_absolute(sample: &Sample, order: SGiniOrder) -> Result<f64> {
    let nu = check_ustat(sample, order)?;
    Ok(ustat_absolute_sorted(sample.sorted(), nu))
}

/// U-statistic absolute index divided by the sample mean.
pub fn ustat_relative(sample: &Sample, order: SGiniOrder) -> Result<f64> {
    Ok(ustat_absolute(sample, order)? / sample.mean())
}

pub fn estimate(
    sample: &Sample,
    order: SGiniOrder,
    estimator: Estimator,
) -> Result<EstimateResult> {
    let absolute = match estimator {
        Estimator::PlugIn => plug_in_absolute(sample, order),
        Estimator::UStatistic => ustat_absolute(sample, order)?,
    };
    Ok(EstimateResult {
        absolute,
        relative: absolute / sample.mean(),
        estimator,
    })
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

/// Averages the degree-`v` kernel over every subset explicitly.
///
/// Intended as a test oracle for [`ustat_absolute`]; refuses to enumerate
/// more than [`DEFAULT_ENUMERATION_CAP`] subsets.
pub fn ustat_brute_force(sample: &Sample, order: SGiniOrder) -> Result<f64> {
    ustat_brute_force_capped(sample, order, DEFAULT_ENUMERATION_CAP)
}

pub fn ustat_brute_force_capped(sample: &Sample, order: SGiniOrder, cap: u128) -> Result<f64> {
    let nu = check_ustat(sample, order)?;
    let n = sample.len();
    let subsets = binomial(n, nu);
    if subsets > cap {
        return Err(Error::OracleSize { subsets, cap });
    }
    let xs = sample.values();
    let mut idx: Vec<usize> = (0..nu).collect();
    let mut total = 0.0;
    loop {
        let (sum, min) = idx
            .iter()
            .fold((0.0, f64::INFINITY), |(s, m), &i| (s + xs[i], m.min(xs[i])));
        total += (sum - nu as f64 * min) / nu as f64;

        // advance to the next combination in lexicographic order
        let mut pos = nu;
        while pos > 0 && idx[pos - 1] == n - nu + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for j in pos..nu {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(total / subsets as f64)
}

/// Gini mean difference and Gini index.
///
/// The GMD is the pairwise U-statistic of `|x_i - x_j|`, evaluated through
/// the degree-2 order-statistic form, and the Gini index is `GMD / (2 mean)`.
pub fn gmd_and_gini(sample: &Sample) -> Result<(f64, f64)> {
    if sample.len() < 2 {
        return Err(Error::InsufficientSample {
            needed: 2,
            got: sample.len(),
        });
    }
    let gmd = 2.0 * ustat_absolute_sorted(sample.sorted(), 2);
    Ok((gmd, gmd / (2.0 * sample.mean())))
}
