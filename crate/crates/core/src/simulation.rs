//! Monte-Carlo studies: coverage and length of intervals, type-1 error and
//! power of the JEL test, under exponential, Pareto and lognormal incomes.

use std::fmt;

use rand::{Rng, RngCore};
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bootstrap::BootstrapConfig;
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::interval::Method;
use crate::jel::{interval_from_profile, test_from_profile, PseudoValueProfile};
use crate::quadrature::integrate_half_line;
use crate::rng::replicate_stream;
use crate::sample::{SGiniOrder, Sample};
use crate::special::erfc;

/// Share of failed replicates above which a study is flagged.
pub const FLAG_FAILURE_FRACTION: f64 = 0.05;

const QUADRATURE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DistributionSpec {
    /// Density `rate * exp(-rate x)`.
    Exponential { rate: f64 },
    /// Survival `(scale / x)^shape` for `x > scale`.
    Pareto { scale: f64, shape: f64 },
    /// `exp(N(mu, sigma2))`.
    LogNormal { mu: f64, sigma2: f64 },
}

impl DistributionSpec {
    /// Builds a spec from a family name (`exp`, `pareto`, `lognormal`) and
    /// its parameters in the order `rate` / `scale, shape` / `mu, sigma2`.
    pub fn from_parts(family: &str, params: &[f64]) -> Result<Self> {
        let want = |k: usize| {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::ParameterDomain(format!(
                    "family `{family}` takes {k} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let spec = match family.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => {
                want(1)?;
                Self::Exponential { rate: params[0] }
            }
            "pareto" => {
                want(2)?;
                Self::Pareto {
                    scale: params[0],
                    shape: params[1],
                }
            }
            "lognormal" | "lnorm" | "log-normal" => {
                want(2)?;
                Self::LogNormal {
                    mu: params[0],
                    sigma2: params[1],
                }
            }
            other => {
                return Err(Error::ParameterDomain(format!(
                    "unknown family `{other}` (expected exp, pareto or lognormal)"
                )))
            }
        };
        spec.validate(None)?;
        Ok(spec)
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exp",
            Self::Pareto { .. } => "pareto",
            Self::LogNormal { .. } => "lognormal",
        }
    }

    pub fn params_label(&self) -> String {
        match self {
            Self::Exponential { rate } => format!("rate={rate}"),
            Self::Pareto { scale, shape } => format!("scale={scale};shape={shape}"),
            Self::LogNormal { mu, sigma2 } => format!("mu={mu};sigma2={sigma2}"),
        }
    }

    /// Checks parameter ranges; with an order, also that the mean of the
    /// minimum of `nu` draws is finite.
    pub fn validate(&self, order: Option<SGiniOrder>) -> Result<()> {
        let bad = |msg: String| Err(Error::ParameterDomain(msg));
        match *self {
            Self::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => {
                bad(format!("exponential rate must be > 0 (got {rate})"))
            }
            Self::Pareto { scale, shape }
                if !(scale > 0.0 && scale.is_finite() && shape > 1.0 && shape.is_finite()) =>
            {
                bad(format!(
                    "pareto needs scale > 0 and shape > 1 (got {scale}, {shape})"
                ))
            }
            Self::Pareto { shape, .. } if order.is_some_and(|o| o.nu() * shape <= 1.0) => {
                bad(format!("pareto shape {shape} too small for this order"))
            }
            Self::LogNormal { mu, sigma2 }
                if !(mu.is_finite() && sigma2 > 0.0 && sigma2.is_finite()) =>
            {
                bad(format!(
                    "lognormal needs finite mu and sigma2 > 0 (got {mu}, {sigma2})"
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match *self {
            Self::Exponential { rate } => (-rate * x).exp(),
            Self::Pareto { scale, shape } => {
                if x <= scale {
                    1.0
                } else {
                    (scale / x).powf(shape)
                }
            }
            Self::LogNormal { mu, sigma2 } => 0.5 * erfc((x.ln() - mu) / (2.0 * sigma2).sqrt()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Pareto { scale, shape } => shape * scale / (shape - 1.0),
            Self::LogNormal { mu, sigma2 } => (mu + 0.5 * sigma2).exp(),
        }
    }

    fn breakpoint(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Pareto { scale, .. } => scale,
            Self::LogNormal { mu, .. } => mu.exp(),
        }
    }

    /// One draw: inverse CDF for exponential and Pareto, `exp(mu + sigma Z)`
    /// with a ziggurat normal `Z` for lognormal.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Exponential { rate } => {
                let u: f64 = rng.sample(Open01);
                -u.ln() / rate
            }
            Self::Pareto { scale, shape } => {
                let u: f64 = rng.sample(Open01);
                scale * u.powf(-1.0 / shape)
            }
            Self::LogNormal { mu, sigma2 } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma2.sqrt() * z).exp()
            }
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.family(), self.params_label())
    }
}

/// `n` independent draws.
pub fn sample_distribution<R: Rng + ?Sized>(
    dist: &DistributionSpec,
    n: usize,
    rng: &mut R,
) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InsufficientSample { needed: 1, got: 0 });
    }
    Sample::new((0..n).map(|_| dist.draw(rng)).collect())
}

/// Population relative S-Gini index `1 - E[min of nu draws] / mean`.
///
/// Closed forms for exponential (`1 - 1/nu`) and Pareto
/// (`1 - nu (a-1) / (nu a - 1)`); lognormal goes through
/// [`true_r_nu_quadrature`].
pub fn true_r_nu(dist: &DistributionSpec, order: SGiniOrder) -> Result<f64> {
    let nu = order.integer()? as f64;
    dist.validate(Some(order))?;
    match *dist {
        DistributionSpec::Exponential { .. } => Ok(1.0 - 1.0 / nu),
        DistributionSpec::Pareto { shape, .. } => Ok(1.0 - nu * (shape - 1.0) / (nu * shape - 1.0)),
        DistributionSpec::LogNormal { .. } => true_r_nu_quadrature(dist, order),
    }
}

/// `1 - ∫ F̄^nu / ∫ F̄` by adaptive quadrature on the half line.
pub fn true_r_nu_quadrature(dist: &DistributionSpec, order: SGiniOrder) -> Result<f64> {
    let nu = order.nu();
    dist.validate(Some(order))?;
    let tol = QUADRATURE_TOLERANCE * dist.mean().max(1.0);
    let at = dist.breakpoint();
    let min_mean = integrate_half_line(|x| dist.survival(x).powf(nu), at, tol);
    let mean = integrate_half_line(|x| dist.survival(x), at, tol);
    Ok(1.0 - min_mean / mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Coverage,
    Type1,
    Power,
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Coverage => "coverage",
            Self::Type1 => "type1",
            Self::Power => "power",
        })
    }
}

impl std::str::FromStr for StudyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "coverage" => Ok(Self::Coverage),
            "type1" | "type-1" => Ok(Self::Type1),
            "power" => Ok(Self::Power),
            other => Err(format!(
                "unknown study `{other}` (expected coverage, type1 or power)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyConfig {
    pub replicates: usize,
    pub seed: u64,
    pub execution: Execution,
    /// Resample counts for bootstrap methods; the seed field is ignored
    /// (each replicate derives its own).
    pub bootstrap: BootstrapConfig,
}

impl StudyConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self {
            replicates,
            seed,
            execution: Execution::default(),
            bootstrap: BootstrapConfig::default(),
        }
    }

    pub fn with_bootstrap(mut self, outer_b: usize, inner_b: usize) -> Self {
        self.bootstrap.outer_b = outer_b;
        self.bootstrap.inner_b = inner_b;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub study: StudyKind,
    pub method: Method,
    pub family: String,
    pub params: String,
    pub nu: usize,
    pub n: usize,
    pub level: f64,
    /// Value the intervals were checked against (coverage) or the null
    /// value under test (type1 / power).
    pub target: f64,
    pub coverage: Option<f64>,
    pub avg_length: Option<f64>,
    pub rejection_rate: Option<f64>,
    /// Binomial standard error of whichever proportion was estimated.
    pub standard_error: f64,
    pub replicates: usize,
    pub completed: usize,
    pub failures: usize,
    pub flagged: bool,
    pub seed: u64,
}

impl SimReport {
    pub const CSV_HEADER: [&'static str; 11] = [
        "method",
        "family",
        "params",
        "nu",
        "n",
        "level",
        "coverage",
        "avg_length",
        "rejection_rate",
        "replicates",
        "seed",
    ];

    pub fn csv_record(&self) -> [String; 11] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.method.to_string(),
            self.family.clone(),
            self.params.clone(),
            self.nu.to_string(),
            self.n.to_string(),
            self.level.to_string(),
            opt(self.coverage),
            opt(self.avg_length),
            opt(self.rejection_rate),
            self.replicates.to_string(),
            self.seed.to_string(),
        ]
    }

    /// The estimated proportion (coverage or rejection rate).
    pub fn proportion(&self) -> f64 {
        self.coverage.or(self.rejection_rate).unwrap_or(f64::NAN)
    }
}

fn binomial_se(p: f64, count: usize) -> f64 {
    (p * (1.0 - p) / count as f64).sqrt()
}

fn check_study(
    dist: &DistributionSpec,
    order: SGiniOrder,
    n: usize,
    cfg: &StudyConfig,
) -> Result<usize> {
    let nu = order.integer()?;
    dist.validate(Some(order))?;
    if cfg.replicates == 0 {
        return Err(Error::ParameterDomain("replicates must be >= 1".into()));
    }
    if n <= nu {
        return Err(Error::InsufficientSample {
            needed: nu + 1,
            got: n,
        });
    }
    Ok(nu)
}

/// Coverage probability and average length of `method` intervals for the
/// population index.
pub fn coverage_study(
    dist: &DistributionSpec,
    order: SGiniOrder,
    n: usize,
    level: f64,
    method: Method,
    cfg: &StudyConfig,
) -> Result<SimReport> {
    let nu = check_study(dist, order, n, cfg)?;
    crate::el::check_level(level)?;
    cfg.bootstrap.validate(method)?;
    let truth = true_r_nu(dist, order)?;

    let outcomes: Vec<Result<(bool, f64)>> = map_indices(cfg.execution, cfg.replicates, |rep| {
        let mut rng = replicate_stream(cfg.seed, rep as u64);
        let sample = sample_distribution(dist, n, &mut rng)?;
        let boot = BootstrapConfig {
            seed: rng.next_u64(),
            execution: Execution::Sequential,
            ..cfg.bootstrap
        };
        let ci = crate::confidence_interval(&sample, order, level, method, &boot)?;
        Ok((ci.contains(truth), ci.length()))
    });

    let mut covered = 0usize;
    let mut length_sum = 0.0;
    let mut completed = 0usize;
    for (hit, len) in outcomes.iter().flatten() {
        completed += 1;
        covered += usize::from(*hit);
        length_sum += len;
    }
    let failures = cfg.replicates - completed;
    if completed == 0 {
        return Err(Error::Calibration(format!(
            "all {} replicates failed",
            cfg.replicates
        )));
    }
    let coverage = covered as f64 / completed as f64;
    Ok(SimReport {
        study: StudyKind::Coverage,
        method,
        family: dist.family().into(),
        params: dist.params_label(),
        nu,
        n,
        level,
        target: truth,
        coverage: Some(coverage),
        avg_length: Some(length_sum / completed as f64),
        rejection_rate: None,
        standard_error: binomial_se(coverage, completed),
        replicates: cfg.replicates,
        completed,
        failures,
        flagged: failures as f64 > FLAG_FAILURE_FRACTION * cfg.replicates as f64,
        seed: cfg.seed,
    })
}

/// Rejection rate of the JEL test of `R = r0` at significance `level`.
///
/// With `r0` equal to the population value this is the type-1 error;
/// otherwise it is power.
pub fn type1_power_study(
    dist: &DistributionSpec,
    order: SGiniOrder,
    n: usize,
    r0: f64,
    level: f64,
    cfg: &StudyConfig,
) -> Result<SimReport> {
    let nu = check_study(dist, order, n, cfg)?;
    crate::el::check_level(level)?;
    if !(0.0..=1.0).contains(&r0) {
        return Err(Error::ParameterDomain(format!(
            "r0 must be in [0, 1] (got {r0})"
        )));
    }
    let truth = true_r_nu(dist, order)?;
    let outcomes: Vec<Result<bool>> = map_indices(cfg.execution, cfg.replicates, |rep| {
        let mut rng = replicate_stream(cfg.seed, rep as u64);
        let sample = sample_distribution(dist, n, &mut rng)?;
        let profile = PseudoValueProfile::new(&sample, order)?;
        Ok(test_from_profile(&profile, r0, level).reject)
    });
    let completed = outcomes.iter().flatten().count();
    let rejected = outcomes.iter().flatten().filter(|r| **r).count();
    let failures = cfg.replicates - completed;
    if completed == 0 {
        return Err(Error::Calibration(format!(
            "all {} replicates failed",
            cfg.replicates
        )));
    }
    let rate = rejected as f64 / completed as f64;
    let study = if (r0 - truth).abs() < 1e-12 {
        StudyKind::Type1
    } else {
        StudyKind::Power
    };
    Ok(SimReport {
        study,
        method: Method::Jel,
        family: dist.family().into(),
        params: dist.params_label(),
        nu,
        n,
        level,
        target: r0,
        coverage: None,
        avg_length: None,
        rejection_rate: Some(rate),
        standard_error: binomial_se(rate, completed),
        replicates: cfg.replicates,
        completed,
        failures,
        flagged: failures as f64 > FLAG_FAILURE_FRACTION * cfg.replicates as f64,
        seed: cfg.seed,
    })
}

/// JEL log-ratio at `candidate` for each replicate, in replicate order.
pub fn jel_statistic_draws(
    dist: &DistributionSpec,
    order: SGiniOrder,
    n: usize,
    candidate: f64,
    cfg: &StudyConfig,
) -> Result<Vec<f64>> {
    check_study(dist, order, n, cfg)?;
    map_indices(cfg.execution, cfg.replicates, |rep| {
        let mut rng = replicate_stream(cfg.seed, rep as u64);
        let sample = sample_distribution(dist, n, &mut rng)?;
        Ok(PseudoValueProfile::new(&sample, order)?.log_ratio(candidate))
    })
    .into_iter()
    .collect()
}

/// JEL intervals for each replicate (used by benchmarks and tests).
pub fn jel_interval_draws(
    dist: &DistributionSpec,
    order: SGiniOrder,
    n: usize,
    level: f64,
    cfg: &StudyConfig,
) -> Result<Vec<(f64, f64)>> {
    check_study(dist, order, n, cfg)?;
    map_indices(cfg.execution, cfg.replicates, |rep| {
        let mut rng = replicate_stream(cfg.seed, rep as u64);
        let sample = sample_distribution(dist, n, &mut rng)?;
        let ci = interval_from_profile(&PseudoValueProfile::new(&sample, order)?, level);
        Ok((ci.lower, ci.upper))
    })
    .into_iter()
    .collect()
}
