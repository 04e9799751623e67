//! Empirical likelihood for the relative S-Gini index.
//!
//! The index satisfies `E[(1 - v F̄^{v-1}(X)) X - R X] = 0`. Replacing the
//! survival function by its empirical version gives one linear constraint per
//! observation; the EL log-ratio at a candidate `R` then follows from a
//! one-dimensional Lagrange multiplier.

use crate::error::{Error, Result};
use crate::estimators::{empirical_survival_ranks, survival_of_sorted};
use crate::interval::{profile_interval, Diagnostics, IntervalResult, Method};
use crate::sample::{SGiniOrder, Sample};
use crate::special::chi2_quantile;

/// Per-observation estimating-equation values at a candidate index value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintVector {
    pub values: Vec<f64>,
    pub candidate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeSolution {
    /// `NaN` when infeasible.
    pub lambda: f64,
    pub feasible: bool,
    /// `p_i = 1 / (n (1 + lambda v_i))`; empty when infeasible.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimates {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
}

/// Which centred quantity the numerator variance `sigma2_sq` is taken of.
///
/// With `h1(x) = x F̄^{v-1}(x) + (v-1) ∫_0^x y F̄^{v-2}(y) dF(y)`:
///
/// - `Product`: `(1 - 2 h1(X) - R) X`.
/// - `Influence`: `(1 - R) X - v h1(X)`, the first-order expansion of the
///   constraint sum once the empirical survival function is linearised.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Sigma2Form {
    Product,
    #[default]
    Influence,
}

fn check_order(order: SGiniOrder) -> Result<f64> {
    let nu = order.nu();
    if nu <= 1.0 {
        return Err(Error::ParameterDomain(format!(
            "empirical likelihood needs an order > 1 (got {nu})"
        )));
    }
    Ok(nu)
}

/// `(1 - v F̄_n^{v-1}(x_i)) x_i` for each observation, original order.
fn base_terms(sample: &Sample, nu: f64) -> Vec<f64> {
    empirical_survival_ranks(sample)
        .iter()
        .zip(sample.values())
        .map(|(s, x)| (1.0 - nu * s.powf(nu - 1.0)) * x)
        .collect()
}

/// `[1 - v F̄_n^{v-1}(x_i)] x_i - candidate * x_i` for every observation.
pub fn constraint_values(
    sample: &Sample,
    order: SGiniOrder,
    candidate: f64,
) -> Result<ConstraintVector> {
    let nu = check_order(order)?;
    let values = base_terms(sample, nu)
        .iter()
        .zip(sample.values())
        .map(|(a, x)| a - candidate * x)
        .collect();
    Ok(ConstraintVector { values, candidate })
}

/// The root of `g(λ) = (1/n) Σ v_i / (1 + λ v_i)`.
///
/// `g` is strictly decreasing on `(-1/max v, -1/min v)`, so a Newton step
/// safeguarded by bisection converges to full precision. One-sided input has
/// no root and yields an infeasible solution; an all-zero vector is feasible
/// with `λ = 0`.
pub fn solve_lambda(values: &[f64]) -> LagrangeSolution {
    let infeasible = LagrangeSolution {
        lambda: f64::NAN,
        feasible: false,
        weights: Vec::new(),
    };
    let n = values.len();
    if n == 0 || values.iter().any(|v| !v.is_finite()) {
        return infeasible;
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let lambda = if min == 0.0 && max == 0.0 {
        0.0
    } else if min < 0.0 && max > 0.0 {
        lambda_root(values, min, max)
    } else {
        return infeasible;
    };
    let nf = n as f64;
    let weights = values
        .iter()
        .map(|v| 1.0 / (nf * (1.0 + lambda * v)))
        .collect();
    LagrangeSolution {
        lambda,
        feasible: true,
        weights,
    }
}

fn lambda_root(values: &[f64], min: f64, max: f64) -> f64 {
    let mut lo = -1.0 / max;
    let mut hi = -1.0 / min;
    let scale = 1.0 / max.max(-min);
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let (mut g, mut dg) = (0.0, 0.0);
        for v in values {
            let t = v / (1.0 + lambda * v);
            g += t;
            dg -= t * t;
        }
        if g == 0.0 {
            return lambda;
        }
        if g > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let mut next = lambda - g / dg;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - lambda).abs();
        lambda = next;
        if step <= 1e-15 * lambda.abs().max(scale) || hi - lo <= 1e-15 * lambda.abs().max(scale) {
            break;
        }
    }
    lambda
}

/// `2 Σ log(1 + λ v_i)`, or `+∞` when zero is outside the hull of `values`.
pub fn log_ratio_from_values(values: &[f64]) -> f64 {
    let sol = solve_lambda(values);
    if !sol.feasible {
        return f64::INFINITY;
    }
    let lr: f64 = values.iter().map(|v| (sol.lambda * v).ln_1p()).sum();
    (2.0 * lr).max(0.0)
}

/// EL log-ratio `L(R)`; zero at [`el_root`], `+∞` outside the feasible hull.
pub fn el_log_ratio(sample: &Sample, order: SGiniOrder, candidate: f64) -> Result<f64> {
    Ok(log_ratio_from_values(
        &constraint_values(sample, order, candidate)?.values,
    ))
}

/// The candidate at which the constraint values sum to zero:
/// `Σ (1 - v F̄_n^{v-1}(x_i)) x_i / Σ x_i`.
pub fn el_root(sample: &Sample, order: SGiniOrder) -> Result<f64> {
    let nu = check_order(order)?;
    Ok(base_terms(sample, nu).iter().sum::<f64>() / sample.sum())
}

/// Feasible candidates lie strictly inside this interval.
pub(crate) fn el_hull(sample: &Sample, nu: f64) -> (f64, f64) {
    // base_i / x_i = 1 - v F̄^{v-1}(x_i), monotone in rank
    let s = survival_of_sorted(sample.sorted());
    let ratio = |f: f64| 1.0 - nu * f.powf(nu - 1.0);
    (ratio(s[0]), ratio(s[s.len() - 1]))
}

/// Plug-in `h1` at each sorted position.
///
/// `h1(x) = x F̄_n^{v-1}(x) + (v-1) (1/n) Σ_{x_j <= x} x_j F̄_n^{v-2}(x_j)`,
/// with `0^0 = 1`. For `1 < v < 2` the term at a zero survival value is
/// dropped instead of taken as infinite.
fn h1_sorted(sorted: &[f64], nu: f64) -> Vec<f64> {
    let n = sorted.len();
    let surv = survival_of_sorted(sorted);
    let term = |r: usize| {
        if surv[r] == 0.0 && nu < 2.0 {
            0.0
        } else {
            sorted[r] * surv[r].powf(nu - 2.0)
        }
    };
    let mut acc = 0.0;
    let mut cumulative: Vec<f64> = (0..n)
        .map(|r| {
            acc += term(r);
            acc
        })
        .collect();
    // ties share the sum over the whole tie block
    for r in (0..n.saturating_sub(1)).rev() {
        if sorted[r] == sorted[r + 1] {
            cumulative[r] = cumulative[r + 1];
        }
    }
    (0..n)
        .map(|r| sorted[r] * surv[r].powf(nu - 1.0) + (nu - 1.0) * cumulative[r] / n as f64)
        .collect()
}

fn population_variance(zs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = zs.clone().count() as f64;
    let mean = zs.clone().sum::<f64>() / n;
    zs.map(|z| (z - mean) * (z - mean)).sum::<f64>() / n
}

/// Plug-in `sigma1_sq = (1/n) Σ C_i(R)^2` and `sigma2_sq` in the
/// [`Sigma2Form::Product`] form.
pub fn variance_estimates(
    sample: &Sample,
    order: SGiniOrder,
    candidate: f64,
) -> Result<VarianceEstimates> {
    variance_estimates_with(sample, order, candidate, Sigma2Form::Product)
}

pub fn variance_estimates_with(
    sample: &Sample,
    order: SGiniOrder,
    candidate: f64,
    form: Sigma2Form,
) -> Result<VarianceEstimates> {
    let nu = check_order(order)?;
    if sample.len() < 2 {
        return Err(Error::InsufficientSample {
            needed: 2,
            got: sample.len(),
        });
    }
    let c = constraint_values(sample, order, candidate)?;
    let sigma1_sq = c.values.iter().map(|v| v * v).sum::<f64>() / sample.len() as f64;

    let sorted = sample.sorted();
    let h1 = h1_sorted(sorted, nu);
    let z = sorted.iter().zip(&h1).map(move |(&x, &h)| match form {
        Sigma2Form::Product => (1.0 - 2.0 * h - candidate) * x,
        Sigma2Form::Influence => (1.0 - candidate) * x - nu * h,
    });
    Ok(VarianceEstimates {
        sigma1_sq,
        sigma2_sq: population_variance(z),
    })
}

/// EL interval `{R : L(R) <= (sigma2_sq / sigma1_sq) χ²₁(level)}`, with
/// both variances evaluated at [`el_root`] and `sigma2_sq` in the default
/// [`Sigma2Form`].
pub fn el_interval(sample: &Sample, order: SGiniOrder, level: f64) -> Result<IntervalResult> {
    el_interval_with(sample, order, level, Sigma2Form::default())
}

pub fn el_interval_with(
    sample: &Sample,
    order: SGiniOrder,
    level: f64,
    form: Sigma2Form,
) -> Result<IntervalResult> {
    check_level(level)?;
    let nu = check_order(order)?;
    if sample.len() < 2 {
        return Err(Error::InsufficientSample {
            needed: 2,
            got: sample.len(),
        });
    }
    if sample.is_constant() {
        return Ok(IntervalResult::degenerate(Method::El, level));
    }
    let root = el_root(sample, order)?;
    let var = variance_estimates_with(sample, order, root, form)?;
    if var.sigma1_sq.is_nan() || var.sigma1_sq <= 0.0 || !var.sigma2_sq.is_finite() {
        return Err(Error::Calibration(format!(
            "EL scale undefined: sigma1_sq = {}, sigma2_sq = {}",
            var.sigma1_sq, var.sigma2_sq
        )));
    }
    let threshold = var.sigma2_sq / var.sigma1_sq * chi2_quantile(level, 1.0);
    Ok(el_region(sample, nu, root, threshold, Method::El, level))
}

/// `{R : L(R) <= threshold}` grown outward from `root`.
pub(crate) fn el_region(
    sample: &Sample,
    nu: f64,
    root: f64,
    threshold: f64,
    method: Method,
    level: f64,
) -> IntervalResult {
    let base = base_terms(sample, nu);
    let xs = sample.values();
    let stat = |r: f64| {
        let values: Vec<f64> = base.iter().zip(xs).map(|(a, x)| a - r * x).collect();
        log_ratio_from_values(&values)
    };
    let profile = profile_interval(stat, root, el_hull(sample, nu), threshold);
    IntervalResult {
        lower: profile.lower,
        upper: profile.upper,
        method,
        level,
        diagnostics: Diagnostics {
            center: root,
            threshold: Some(threshold),
            lower_at_hull: profile.lower_at_hull,
            upper_at_hull: profile.upper_at_hull,
            ..Diagnostics::default()
        },
    }
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!(
            "level must be in (0, 1) (got {level})"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    fn nu(v: f64) -> SGiniOrder {
        SGiniOrder::new(v).unwrap()
    }

    #[test]
    fn constraint_examples() {
        let c = constraint_values(&s(&[1.0, 2.0, 3.0]), nu(2.0), 5.0 / 9.0).unwrap();
        for (got, want) in c.values.iter().zip([-8.0 / 9.0, -4.0 / 9.0, 4.0 / 3.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-15);
        }
        let c = constraint_values(&s(&[4.0, 4.0]), nu(2.0), 0.0).unwrap();
        // both copies are the maximum, so F̄_n = 0 for each
        assert_eq!(c.values, vec![4.0, 4.0]);
        let sample = s(&[0.4, 2.2, 1.3, 7.0, 0.9]);
        let root = el_root(&sample, nu(3.0)).unwrap();
        let sum: f64 = constraint_values(&sample, nu(3.0), root)
            .unwrap()
            .values
            .iter()
            .sum();
        assert!(sum.abs() < 1e-13);
    }

    #[test]
    fn el_needs_order_above_one() {
        assert!(constraint_values(&s(&[1.0, 2.0]), nu(0.5), 0.1).is_err());
        assert!(el_interval(&s(&[1.0, 2.0]), nu(0.5), 0.95).is_err());
    }

    #[test]
    fn lambda_examples() {
        let sol = solve_lambda(&[-1.0, 1.0]);
        assert!(sol.feasible);
        assert_eq!(sol.lambda, 0.0);
        let sol = solve_lambda(&[-1.0, 3.0]);
        assert!(sol.feasible);
        assert_relative_eq!(sol.lambda, 1.0 / 3.0, epsilon = 1e-14);
        assert!(!solve_lambda(&[1.0, 2.0, 3.0]).feasible);
        assert!(!solve_lambda(&[-1.0, 0.0]).feasible);
        assert!(solve_lambda(&[0.0, 0.0]).feasible);
    }

    #[test]
    fn log_ratio_examples() {
        let sample = s(&[1.0, 2.0, 3.0]);
        assert_eq!(el_root(&sample, nu(2.0)).unwrap(), 5.0 / 9.0);
        assert!(el_log_ratio(&sample, nu(2.0), 5.0 / 9.0).unwrap() < 1e-12);
        assert_eq!(el_log_ratio(&sample, nu(2.0), 5.0).unwrap(), f64::INFINITY);
        assert_eq!(el_log_ratio(&sample, nu(2.0), -3.0).unwrap(), f64::INFINITY);
        let l = el_log_ratio(&sample, nu(2.0), 0.2).unwrap();
        assert!(l > 0.0 && l.is_finite());
    }

    #[test]
    fn variance_examples() {
        let sample = s(&[1.0, 2.0, 3.0]);
        let v = variance_estimates(&sample, nu(2.0), 5.0 / 9.0).unwrap();
        assert_relative_eq!(v.sigma1_sq, 224.0 / 243.0, epsilon = 1e-14);
        assert_relative_eq!(v.sigma2_sq, 3368.0 / 243.0, epsilon = 1e-12);
        // h1 = (1, 5/3, 2): Influence form z = (4/9) x - 2 h1
        let w =
            variance_estimates_with(&sample, nu(2.0), 5.0 / 9.0, Sigma2Form::Influence).unwrap();
        let z = [4.0 / 9.0 - 2.0, 8.0 / 9.0 - 10.0 / 3.0, 12.0 / 9.0 - 4.0];
        let m = z.iter().sum::<f64>() / 3.0;
        let want = z.iter().map(|q| (q - m) * (q - m)).sum::<f64>() / 3.0;
        assert_relative_eq!(w.sigma2_sq, want, epsilon = 1e-14);

        let c = 2.5;
        let v = variance_estimates(&s(&[c; 4]), nu(3.0), 0.0).unwrap();
        assert_relative_eq!(v.sigma1_sq, c * c, epsilon = 1e-14);
        assert!(variance_estimates(&s(&[1.0]), nu(2.0), 0.0).is_err());
    }

    #[test]
    fn h1_handles_ties() {
        let h = h1_sorted(&[1.0, 2.0, 2.0, 5.0], 2.0);
        // F̄ = (3/4, 1/4, 1/4, 0); cumulative x sums over x_j <= x: 1, 5, 5, 10
        let want = [0.75 + 0.25, 0.5 + 1.25, 0.5 + 1.25, 2.5];
        for (a, b) in h.iter().zip(want) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn interval_contains_root_and_widens() {
        let sample = s(&[0.3, 1.7, 0.9, 2.4, 0.2, 5.1, 1.1, 0.8, 3.3, 0.6, 1.4, 0.5]);
        let root = el_root(&sample, nu(3.0)).unwrap();
        let mut prev: Option<IntervalResult> = None;
        for level in [0.5, 0.8, 0.9, 0.95, 0.99] {
            let ci = el_interval(&sample, nu(3.0), level).unwrap();
            assert!(ci.contains(root));
            if let Some(p) = prev {
                assert!(ci.lower <= p.lower && ci.upper >= p.upper);
            }
            prev = Some(ci);
        }
    }

    #[test]
    fn degenerate_interval() {
        let ci = el_interval(&s(&[3.0; 5]), nu(2.0), 0.95).unwrap();
        assert_eq!((ci.lower, ci.upper), (0.0, 0.0));
        assert!(ci.diagnostics.degenerate);
    }
}
