use serde::{Deserialize, Serialize};

use super::{apportion, ExchangeError};
use crate::Scalar;

/// Largest allowed `|sum(delta)|` for [`ConservedTally::absorb`].
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Integer counts per label plus the real residual each label is still owed.
///
/// `sum(counts) == total` holds after every operation. `counts[i] + residuals[i]`
/// is the continuous value of label `i`. Residuals are kept in `[-0.5, 0.5)`
/// whenever an integer assignment with that property exists; otherwise their
/// spread is at most one unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ConservedTally<T> {
    labels: Vec<String>,
    counts: Vec<u64>,
    residuals: Vec<T>,
    total: u64,
}

impl<T: Scalar> ConservedTally<T> {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>, counts: Vec<u64>) -> Self {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        assert_eq!(labels.len(), counts.len(), "one count per label");
        let total = counts.iter().sum();
        let residuals = vec![T::zero(); counts.len()];
        Self {
            labels,
            counts,
            residuals,
            total,
        }
    }

    /// Integer counts by apportioning `values` to `total`, residuals holding the rest.
    pub fn from_continuous<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        values: &[T],
        total: u64,
    ) -> Result<Self, ExchangeError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != values.len() {
            return Err(ExchangeError::LengthMismatch {
                expected: labels.len(),
                found: values.len(),
            });
        }
        let counts = apportion(values, total)?;
        let residuals = values
            .iter()
            .zip(&counts)
            .map(|(&v, &c)| v - T::from_count(c))
            .collect();
        let mut tally = Self {
            labels,
            counts,
            residuals,
            total,
        };
        tally.rebalance()?;
        Ok(tally)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn residuals(&self) -> &[T] {
        &self.residuals
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, label: &str) -> Option<u64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.counts[i])
    }

    pub fn continuous_view(&self) -> Vec<T> {
        self.counts
            .iter()
            .zip(&self.residuals)
            .map(|(&c, &r)| T::from_count(c) + r)
            .collect()
    }

    pub fn absorb(&mut self, delta: &[T]) -> Result<(), ExchangeError> {
        self.absorb_with_tolerance(delta, T::lit(MASS_TOLERANCE))
    }

    /// Adds a zero-sum continuous delta, then moves whole units from the label
    /// with the most negative residual to the one with the largest residual
    /// until no transfer narrows the residual spread. Leaves `self` untouched
    /// on error.
    pub fn absorb_with_tolerance(&mut self, delta: &[T], tolerance: T) -> Result<(), ExchangeError> {
        if delta.len() != self.counts.len() {
            return Err(ExchangeError::LengthMismatch {
                expected: self.counts.len(),
                found: delta.len(),
            });
        }
        let sum = delta.iter().fold(T::zero(), |acc, &d| acc + d);
        if !sum.is_finite() || sum.abs() > tolerance {
            return Err(ExchangeError::MassLeak { sum: sum.as_f64() });
        }
        let mut next = self.clone();
        for (r, &d) in next.residuals.iter_mut().zip(delta) {
            *r = *r + d;
        }
        next.rebalance()?;
        *self = next;
        Ok(())
    }

    fn rebalance(&mut self) -> Result<(), ExchangeError> {
        let one = T::one();
        while self.counts.len() > 1 {
            let (mut hi, mut lo) = (0, 0);
            for i in 1..self.residuals.len() {
                if self.residuals[i] > self.residuals[hi] {
                    hi = i;
                }
                if self.residuals[i] < self.residuals[lo] {
                    lo = i;
                }
            }
            if self.residuals[hi] - self.residuals[lo] <= one {
                break;
            }
            if self.counts[lo] == 0 {
                return Err(ExchangeError::NegativeCount {
                    label: self.labels[lo].clone(),
                });
            }
            self.counts[lo] -= 1;
            self.residuals[lo] = self.residuals[lo] + one;
            self.counts[hi] += 1;
            self.residuals[hi] = self.residuals[hi] - one;
        }
        Ok(())
    }

    /// Replaces the integer counts, keeping the continuous view.
    pub fn rebase(&mut self, counts: &[u64]) -> Result<(), ExchangeError> {
        if counts.len() != self.counts.len() {
            return Err(ExchangeError::LengthMismatch {
                expected: self.counts.len(),
                found: counts.len(),
            });
        }
        let sum: u64 = counts.iter().sum();
        if sum != self.total {
            return Err(ExchangeError::MassLeak {
                sum: sum as f64 - self.total as f64,
            });
        }
        let view = self.continuous_view();
        for i in 0..counts.len() {
            self.residuals[i] = view[i] - T::from_count(counts[i]);
        }
        self.counts = counts.to_vec();
        Ok(())
    }
}
