//! Probability distributions over the secret set.

use serde::{Deserialize, Serialize};

use crate::error::{QifError, Result};
use crate::DEFAULT_TOLERANCE;

/// A probability distribution over secrets, indexed like the mechanism's
/// secret list.
///
/// Valid by construction: every entry is finite and non-negative, and the
/// entries sum to 1 within the tolerance passed at construction
/// ([`DEFAULT_TOLERANCE`] unless stated otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    /// Build a belief from raw probabilities, validating with the default
    /// tolerance.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, DEFAULT_TOLERANCE)
    }

    /// Build a belief from raw probabilities, validating the sum within
    /// `tolerance`.
    pub fn with_tolerance(probs: Vec<f64>, tolerance: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(QifError::InvalidBelief("no entries".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(QifError::InvalidBelief(format!(
                    "entry {i} is {p}, expected a probability"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tolerance {
            return Err(QifError::InvalidBelief(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// The uniform distribution over `n` secrets.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "a belief needs at least one secret");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// The distribution putting all mass on secret `i` (of `n`).
    pub fn point_mass(n: usize, i: usize) -> Self {
        assert!(i < n, "point mass index out of range");
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        Self { probs }
    }

    /// Internal constructor for vectors already known to be normalized
    /// (e.g. the output of a Bayes update, which divides by its own sum).
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!(
            (probs.iter().sum::<f64>() - 1.0).abs() <= 1e-6,
            "from_normalized called on an unnormalized vector"
        );
        Self { probs }
    }

    /// Number of secrets.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// True when the belief ranges over zero secrets (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of secret `i`.
    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// All probabilities, indexed like the mechanism's secret list.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Indices of secrets with strictly positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len())
            .filter(|&i| self.probs[i] > 0.0)
            .collect()
    }

    /// True when every entry is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    ///
    /// Panics if the dimensions differ or `lambda` is outside `[0, 1]`.
    pub fn mix(&self, other: &Belief, lambda: f64) -> Belief {
        assert_eq!(self.len(), other.len(), "mixing beliefs of different sizes");
        assert!((0.0..=1.0).contains(&lambda), "lambda must lie in [0, 1]");
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(&p, &q)| lambda * p + (1.0 - lambda) * q)
            .collect();
        Belief::from_normalized(probs)
    }
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = QifError;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Belief::new(probs)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Vec<f64> {
        b.probs
    }
}
