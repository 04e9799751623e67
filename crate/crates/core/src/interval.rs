use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Interval construction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "el")]
    El,
    #[serde(rename = "jel")]
    Jel,
    #[serde(rename = "boot-t")]
    BootT,
    #[serde(rename = "bcel")]
    Bcel,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::El, Method::Jel, Method::BootT, Method::Bcel];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::El => "el",
            Method::Jel => "jel",
            Method::BootT => "boot-t",
            Method::Bcel => "bcel",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "el" => Ok(Method::El),
            "jel" => Ok(Method::Jel),
            "boot-t" | "boot_t" | "boott" => Ok(Method::BootT),
            "bcel" => Ok(Method::Bcel),
            other => Err(format!(
                "unknown method `{other}` (expected el, jel, boot-t or bcel)"
            )),
        }
    }
}

/// Extra information about how an interval was obtained.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Point the interval was grown from (EL root, U-statistic estimate, ...).
    pub center: f64,
    /// Critical value the log-ratio was compared against, when there is one.
    pub threshold: Option<f64>,
    /// An endpoint sits on the edge of the feasible region rather than on a
    /// threshold crossing.
    pub lower_at_hull: bool,
    pub upper_at_hull: bool,
    /// The sample was constant and the interval collapsed to `[0, 0]`.
    pub degenerate: bool,
    /// Bootstrap replicates discarded (degenerate resample or zero inner
    /// standard error).
    pub dropped_replicates: usize,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalResult {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub level: f64,
    pub diagnostics: Diagnostics,
}

impl IntervalResult {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub(crate) fn degenerate(method: Method, level: f64) -> Self {
        Self {
            lower: 0.0,
            upper: 0.0,
            method,
            level,
            diagnostics: Diagnostics {
                degenerate: true,
                ..Diagnostics::default()
            },
        }
    }
}

/// Absolute tolerance on interval endpoints.
pub const ENDPOINT_TOLERANCE: f64 = 1e-9;
const INITIAL_STEP: f64 = 0.05;

pub(crate) struct Profile {
    pub lower: f64,
    pub upper: f64,
    pub lower_at_hull: bool,
    pub upper_at_hull: bool,
}

/// Finds `{r : stat(r) <= threshold}` around `center`, assuming `stat` is
/// zero at `center`, nondecreasing away from it, and finite only on the open
/// interval `hull`.
///
/// Each side steps outward by 0.05, doubling, until the statistic exceeds the
/// threshold or the hull edge is reached, then bisects the last bracket.
pub(crate) fn profile_interval(
    stat: impl Fn(f64) -> f64,
    center: f64,
    hull: (f64, f64),
    threshold: f64,
) -> Profile {
    let (lower, lower_at_hull) = search_side(&stat, center, hull.0, threshold, -1.0);
    let (upper, upper_at_hull) = search_side(&stat, center, hull.1, threshold, 1.0);
    Profile {
        lower,
        upper,
        lower_at_hull,
        upper_at_hull,
    }
}

fn search_side(
    stat: &impl Fn(f64) -> f64,
    center: f64,
    edge: f64,
    threshold: f64,
    direction: f64,
) -> (f64, bool) {
    let room = (edge - center) * direction;
    if room <= 0.0 {
        return (center, true);
    }
    let mut inside = 0.0; // distance from center known to satisfy the bound
    let mut step = INITIAL_STEP;
    let outside = loop {
        if step >= room {
            break room;
        }
        if stat(center + direction * step) > threshold {
            break step;
        }
        inside = step;
        step *= 2.0;
    };
    let mut lo = inside;
    let mut hi = outside;
    while hi - lo > ENDPOINT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if stat(center + direction * mid) > threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let at_hull = room - lo <= 2.0 * ENDPOINT_TOLERANCE;
    (center + direction * lo, at_hull)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_profile() {
        let p = profile_interval(|r: f64| (r - 0.3).powi(2) * 100.0, 0.3, (-10.0, 10.0), 1.0);
        assert!((p.lower - 0.2).abs() < 1e-8);
        assert!((p.upper - 0.4).abs() < 1e-8);
        assert!(!p.lower_at_hull && !p.upper_at_hull);
    }

    #[test]
    fn hull_edge_when_threshold_never_crossed() {
        let stat = |r: f64| {
            if r > 0.0 && r < 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        let p = profile_interval(stat, 0.5, (0.0, 1.0), 3.84);
        assert!(p.lower < 1e-8 && p.upper > 1.0 - 1e-8);
        assert!(p.lower_at_hull && p.upper_at_hull);
    }

    #[test]
    fn method_parsing() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert_eq!("boot_t".parse::<Method>().unwrap(), Method::BootT);
        assert!("percentile".parse::<Method>().is_err());
    }
}
