//! Special functions: log-gamma, regularized incomplete gamma, `erfc`, and
//! the chi-square distribution built from them.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_TERMS: usize = 10_000;

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn prefactor(a: f64, x: f64) -> f64 {
    (a * x.ln() - x - ln_gamma(a)).exp()
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_TERMS {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * prefactor(a, x)
}

// modified Lentz evaluation of the continued fraction for Q(a, x)
fn upper_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h * prefactor(a, x)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "gamma_p needs a > 0");
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "gamma_q needs a > 0");
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_fraction(a, x)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 0.0 {
        gamma_q(0.5, x * x)
    } else {
        2.0 - gamma_q(0.5, x * x)
    }
}

/// Chi-square CDF with `df` degrees of freedom.
pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    gamma_p(0.5 * df, 0.5 * x)
}

/// Chi-square survival function; `chi2_sf(inf, df) == 0`.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    gamma_q(0.5 * df, 0.5 * x)
}

fn chi2_pdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = 0.5 * df;
    ((k - 1.0) * x.ln() - 0.5 * x - k * 2f64.ln() - ln_gamma(k)).exp()
}

/// The `p`-quantile of the chi-square distribution: the `x` with
/// `chi2_cdf(x, df) == p`.
///
/// Safeguarded Newton iteration inside an expanding bracket. For `p > 0.5`
/// the iteration runs on the survival function so upper quantiles keep full
/// relative accuracy.
pub fn chi2_quantile(p: f64, df: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    assert!((0.0..=1.0).contains(&p), "probability must be in [0, 1]");
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let upper_tail = p > 0.5;
    // residual is increasing in x in both branches
    let residual = |x: f64| {
        if upper_tail {
            (1.0 - p) - chi2_sf(x, df)
        } else {
            chi2_cdf(x, df) - p
        }
    };

    let mut lo = 0.0;
    let mut hi = df.max(1.0);
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    // Wilson-Hilferty start
    let z = normal_quantile_approx(p);
    let h = 2.0 / (9.0 * df);
    let mut x = (df * (1.0 - h + z * h.sqrt()).powi(3)).clamp(lo, hi);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let r = residual(x);
        if r == 0.0 {
            return x;
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = chi2_pdf(x, df);
        let mut next = x - r / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs() || hi - lo <= 1e-15 * hi {
            return next;
        }
        x = next;
    }
    x
}

/// Rough standard-normal quantile used only for starting values
/// (Acklam-style rational approximation, about 1e-9 accurate).
fn normal_quantile_approx(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let tail = |q: f64| {
        let q = (-2.0 * q.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < 0.02425 {
        tail(p)
    } else if p > 1.0 - 0.02425 {
        -tail(1.0 - p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use statrs::function::erf;

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(0.5), 0.5 * PI.ln(), epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(10.0), 362_880f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(0.1), 2.252_712_651_734_206, max_relative = 1e-13);
    }

    #[test]
    fn chi2_one_df_critical_values() {
        assert_relative_eq!(
            chi2_quantile(0.95, 1.0),
            3.841_458_820_694_124,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            chi2_quantile(0.99, 1.0),
            6.634_896_601_021_214,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            chi2_quantile(0.90, 1.0),
            2.705_543_454_095_404,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            chi2_sf(3.841_458_820_694_124, 1.0),
            0.05,
            max_relative = 1e-12
        );
    }

    #[test]
    fn agrees_with_statrs() {
        for df in [1.0, 2.0, 3.5, 10.0, 50.0] {
            let reference = ChiSquared::new(df).unwrap();
            for x in [0.01, 0.3, 1.0, 2.5, 7.0, 20.0, 60.0] {
                assert_relative_eq!(
                    chi2_cdf(x, df),
                    reference.cdf(x),
                    epsilon = 1e-13,
                    max_relative = 1e-10
                );
                assert_relative_eq!(
                    chi2_sf(x, df),
                    reference.sf(x),
                    epsilon = 1e-300,
                    max_relative = 1e-10
                );
            }
            for p in [1e-6, 0.01, 0.25, 0.5, 0.9, 0.975, 0.999_999] {
                let q = chi2_quantile(p, df);
                assert_relative_eq!(chi2_cdf(q, df), p, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn erfc_agrees_with_statrs() {
        for x in [-3.0, -0.7, 0.0, 0.2, 1.0, 2.5, 5.0, 9.0] {
            assert_relative_eq!(
                erfc(x),
                erf::erfc(x),
                epsilon = 1e-300,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn edges() {
        assert_eq!(chi2_sf(f64::INFINITY, 1.0), 0.0);
        assert_eq!(chi2_sf(0.0, 1.0), 1.0);
        assert_eq!(chi2_quantile(0.0, 1.0), 0.0);
        assert_eq!(chi2_quantile(1.0, 1.0), f64::INFINITY);
        assert_eq!(erfc(f64::INFINITY), 0.0);
    }
}
