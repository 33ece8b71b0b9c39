//! Finite probability vectors over labelled symbols.

use crate::error::{CqError, Result};
use serde::{Deserialize, Serialize};

const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(CqError::LabelMismatch(format!(
                "{} labels vs {} weights",
                labels.len(),
                weights.len()
            )));
        }
        if labels.is_empty() {
            return Err(CqError::InvalidParameter("empty distribution".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(CqError::LabelMismatch(format!("duplicate label {l:?}")));
            }
        }
        for (l, &w) in labels.iter().zip(&weights) {
            if w < 0.0 || !w.is_finite() {
                return Err(CqError::InvalidParameter(format!(
                    "weight of {l:?} is {w}"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(CqError::InvalidParameter(format!(
                "weights sum to {sum}, off by more than {NORMALIZATION_TOL:.0e}"
            )));
        }
        Ok(ProbabilityVector { labels, weights })
    }

    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, vec![1.0 / n as f64; n])
    }

    /// Normalizes nonnegative weights; rejects an all-zero vector.
    pub fn normalized(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(CqError::InvalidParameter(
                "cannot normalize: total weight is zero".into(),
            ));
        }
        Self::new(labels, weights.iter().map(|w| w / sum).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_of(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.weights[i])
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn min_positive(&self) -> f64 {
        self.weights
            .iter()
            .copied()
            .filter(|&w| w > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn same_labels(&self, other: &ProbabilityVector) -> bool {
        self.labels == other.labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        assert!(ProbabilityVector::new(vec!["a".into()], vec![0.9]).is_err());
        assert!(ProbabilityVector::new(vec!["a".into(), "a".into()], vec![0.5, 0.5]).is_err());
        assert!(ProbabilityVector::new(vec!["a".into(), "b".into()], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn support_and_min_positive() {
        let p =
            ProbabilityVector::new(vec!["a".into(), "b".into(), "c".into()], vec![0.0, 0.25, 0.75])
                .unwrap();
        assert_eq!(p.support(), vec![1, 2]);
        assert_eq!(p.min_positive(), 0.25);
    }
}
