use crate::error::{Error, Result};

/// An immutable batch of strictly positive observations.
///
/// The ascending order statistics and the sorting permutation are computed
/// once at construction. Ties keep their original relative order.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
    // order[r] is the original index of the r-th smallest value
    order: Vec<usize>,
    sum: f64,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSample("sample is empty".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidSample(format!(
                "observation {i} is {v}; values must be finite and > 0"
            )));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted = order.iter().map(|&i| values[i]).collect();
        let sum = values.iter().sum();
        Ok(Self {
            values,
            sorted,
            order,
            sum,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations in their original order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Observations in ascending order.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// `order()[r]` is the original index of the `r`-th smallest observation.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.len() - 1]
    }

    /// True when every observation has the same value.
    pub fn is_constant(&self) -> bool {
        self.min() == self.max()
    }

    /// Multiplies every observation by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }

    /// Builds a new sample from observations picked by index (with repetition).
    pub(crate) fn resample(&self, indices: impl IntoIterator<Item = usize>) -> Self {
        let values: Vec<f64> = indices.into_iter().map(|i| self.values[i]).collect();
        Self::new(values).expect("resampled values come from a valid sample")
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl TryFrom<&[f64]> for Sample {
    type Error = Error;

    fn try_from(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }
}

/// The S-Gini order `nu`.
///
/// Any real `nu > 0` with `nu != 1` is accepted by the plug-in estimators.
/// The U-statistic path (and everything built on it) needs an integer
/// `nu >= 2`, see [`SGiniOrder::integer`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SGiniOrder(f64);

impl SGiniOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu <= 0.0 || nu == 1.0 {
            return Err(Error::ParameterDomain(format!(
                "S-Gini order must be finite, > 0 and != 1 (got {nu})"
            )));
        }
        Ok(Self(nu))
    }

    pub fn nu(self) -> f64 {
        self.0
    }

    /// Returns `Some(nu)` when the order is an integer `>= 2`.
    pub fn as_integer(self) -> Option<usize> {
        (self.0 >= 2.0 && self.0.fract() == 0.0 && self.0 <= u32::MAX as f64)
            .then_some(self.0 as usize)
    }

    /// Like [`as_integer`](Self::as_integer), but an error for fractional orders.
    pub fn integer(self) -> Result<usize> {
        self.as_integer().ok_or_else(|| {
            Error::ParameterDomain(format!(
                "this operation needs an integer order >= 2 (got {})",
                self.0
            ))
        })
    }
}

impl TryFrom<f64> for SGiniOrder {
    type Error = Error;

    fn try_from(nu: f64) -> Result<Self> {
        Self::new(nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_positive() {
        assert!(Sample::new(vec![]).is_err());
        assert!(Sample::new(vec![1.0, 0.0]).is_err());
        assert!(Sample::new(vec![1.0, -2.0]).is_err());
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        assert!(Sample::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn sorted_is_stable_permutation() {
        let s = Sample::new(vec![3.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.sorted(), &[1.0, 1.0, 2.0, 3.0]);
        assert_eq!(s.order(), &[1, 3, 2, 0]);
        assert_eq!(s.mean(), 1.75);
        assert!(!s.is_constant());
    }

    #[test]
    fn order_domain() {
        assert!(SGiniOrder::new(1.0).is_err());
        assert!(SGiniOrder::new(0.0).is_err());
        assert!(SGiniOrder::new(-2.0).is_err());
        assert!(SGiniOrder::new(f64::NAN).is_err());
        assert_eq!(SGiniOrder::new(3.0).unwrap().as_integer(), Some(3));
        assert_eq!(SGiniOrder::new(2.5).unwrap().as_integer(), None);
        assert_eq!(SGiniOrder::new(0.5).unwrap().as_integer(), None);
        assert!(SGiniOrder::new(1.5).unwrap().integer().is_err());
    }
}
