//! Uncertainty measures over beliefs.
//!
//! A measure maps a belief on the secret space to a nonnegative real. All
//! leakage quantities in this crate are differences of such values, so the
//! only structural requirement is concavity: averaging beliefs never reports
//! less uncertainty than the average of their uncertainties. Concavity is
//! what makes expected posterior uncertainty at most prior uncertainty, hence
//! leakage nonnegative.
//!
//! Built-ins:
//!
//! - `shannon`: H(p) = -sum_x p(x) log2 p(x), in bits;
//! - `error`: 1 - max_x p(x), the Bayes error of a single guess;
//! - `guessing`: expected number of tries to hit the secret when guessing in
//!   decreasing-probability order (ties broken by smallest index), so a point
//!   mass evaluates to 1;
//! - `variance`: variance of the numeric secret values under the belief;
//! - custom closures for experimentation.

use std::fmt;
use std::sync::Arc;

use crate::belief::Belief;
use crate::error::{QifError, Result};
use crate::random::{interior_belief, rng};

/// Identifies a built-in measure by name; used by CLI parsing and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Shannon,
    Error,
    Guessing,
    Variance,
}

impl MeasureKind {
    /// Parse a measure name as accepted on the command line.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "shannon" => Ok(Self::Shannon),
            "error" => Ok(Self::Error),
            "guessing" => Ok(Self::Guessing),
            "variance" => Ok(Self::Variance),
            other => Err(QifError::Parse(format!(
                "unknown measure `{other}`, expected shannon, error, guessing, or variance"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Shannon => "shannon",
            Self::Error => "error",
            Self::Guessing => "guessing",
            Self::Variance => "variance",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closure type for custom measure values.
pub type ValueFn = Arc<dyn Fn(&Belief) -> f64 + Send + Sync>;
/// Closure type for custom measure subgradients.
pub type SubgradientFn = Arc<dyn Fn(&Belief) -> Vec<f64> + Send + Sync>;

/// An uncertainty measure on beliefs.
#[derive(Clone)]
pub enum UncertaintyMeasure {
    /// Shannon entropy in bits.
    Shannon,
    /// Probability of a wrong single guess.
    Error,
    /// Expected guesses under the best guessing order.
    Guessing,
    /// Variance of the secret values under the belief.
    Variance {
        /// Numeric value of each secret, indexed like the belief.
        secret_values: Vec<f64>,
    },
    /// User-supplied measure. The value function must be concave for leakage
    /// results to be meaningful; `concavity_probe` checks this empirically.
    Custom {
        name: String,
        value_fn: ValueFn,
        /// Optional supporting-hyperplane coefficients at interior beliefs,
        /// required to derive a proper scoring rule.
        subgradient_fn: Option<SubgradientFn>,
    },
}

impl fmt::Debug for UncertaintyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Shannon => f.write_str("Shannon"),
            Self::Error => f.write_str("Error"),
            Self::Guessing => f.write_str("Guessing"),
            Self::Variance { secret_values } => f
                .debug_struct("Variance")
                .field("secret_values", secret_values)
                .finish(),
            Self::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

impl UncertaintyMeasure {
    /// Build a built-in measure. `secret_values` is consulted only for
    /// `variance`, which fails without it.
    pub fn from_kind(kind: MeasureKind, secret_values: Option<&[f64]>) -> Result<Self> {
        match kind {
            MeasureKind::Shannon => Ok(Self::Shannon),
            MeasureKind::Error => Ok(Self::Error),
            MeasureKind::Guessing => Ok(Self::Guessing),
            MeasureKind::Variance => {
                let values = secret_values.ok_or(QifError::MissingSecretValues)?;
                Ok(Self::Variance {
                    secret_values: values.to_vec(),
                })
            }
        }
    }

    /// Report name of the measure.
    pub fn name(&self) -> &str {
        match self {
            Self::Shannon => "shannon",
            Self::Error => "error",
            Self::Guessing => "guessing",
            Self::Variance { .. } => "variance",
            Self::Custom { name, .. } => name,
        }
    }

    /// Built-in kind, if this is a built-in.
    pub fn kind(&self) -> Option<MeasureKind> {
        match self {
            Self::Shannon => Some(MeasureKind::Shannon),
            Self::Error => Some(MeasureKind::Error),
            Self::Guessing => Some(MeasureKind::Guessing),
            Self::Variance { .. } => Some(MeasureKind::Variance),
            Self::Custom { .. } => None,
        }
    }

    /// Check that the measure can evaluate beliefs of dimension `dim`.
    pub fn check_dimension(&self, dim: usize) -> Result<()> {
        if let Self::Variance { secret_values } = self {
            if secret_values.len() != dim {
                return Err(QifError::DimensionMismatch {
                    expected: secret_values.len(),
                    got: dim,
                });
            }
        }
        Ok(())
    }

    /// Evaluate the measure at a belief.
    pub fn eval(&self, belief: &Belief) -> Result<f64> {
        self.check_dimension(belief.len())?;
        let p = belief.probs();
        Ok(match self {
            Self::Shannon => shannon_entropy(p),
            Self::Error => 1.0 - p.iter().copied().fold(0.0, f64::max),
            Self::Guessing => guessing_entropy(p),
            Self::Variance { secret_values } => variance(p, secret_values),
            Self::Custom { value_fn, .. } => value_fn(belief),
        })
    }
}

/// Shannon entropy in bits, with the 0 log 0 = 0 convention.
fn shannon_entropy(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &pi in p {
        if pi > 0.0 {
            h -= pi * pi.log2();
        }
    }
    // Clamp the -0.0 that a point mass produces.
    if h == 0.0 {
        0.0
    } else {
        h
    }
}

/// Expected number of guesses when trying secrets in decreasing-probability
/// order, ties broken toward the smaller index.
fn guessing_entropy(p: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&i, &j| p[j].partial_cmp(&p[i]).unwrap().then(i.cmp(&j)));
    order
        .iter()
        .enumerate()
        .map(|(rank, &i)| (rank + 1) as f64 * p[i])
        .sum()
}

fn variance(p: &[f64], values: &[f64]) -> f64 {
    let mean: f64 = p.iter().zip(values).map(|(&pi, &v)| pi * v).sum();
    p.iter()
        .zip(values)
        .map(|(&pi, &v)| pi * (v - mean) * (v - mean))
        .sum()
}

/// Outcome of an empirical concavity check.
#[derive(Clone, Debug)]
pub struct ConcavityReport {
    /// Number of random (p, q, lambda) triples tested.
    pub samples: usize,
    /// Largest observed value of
    /// `lambda U(p) + (1 - lambda) U(q) - U(lambda p + (1 - lambda) q)`.
    /// Nonpositive (up to rounding) for concave measures.
    pub max_violation: f64,
    /// Triple attaining `max_violation`, when any sample was taken.
    pub witness: Option<ConcavityWitness>,
}

/// The mixture at which the largest concavity violation was observed.
#[derive(Clone, Debug)]
pub struct ConcavityWitness {
    pub lambda: f64,
    pub p: Belief,
    pub q: Belief,
}

/// Probe a measure for concavity on random interior belief pairs of dimension
/// `dim`. Reports the worst violation found; it cannot prove concavity, only
/// refute it.
pub fn concavity_probe(
    measure: &UncertaintyMeasure,
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<ConcavityReport> {
    measure.check_dimension(dim)?;
    let mut r = rng(seed);
    let mut max_violation = f64::NEG_INFINITY;
    let mut witness = None;
    for _ in 0..samples {
        let p = interior_belief(&mut r, dim);
        let q = interior_belief(&mut r, dim);
        let lambda: f64 = rand::Rng::gen(&mut r);
        let mixed = p.mix(&q, lambda);
        let violation =
            lambda * measure.eval(&p)? + (1.0 - lambda) * measure.eval(&q)? - measure.eval(&mixed)?;
        if violation > max_violation {
            max_violation = violation;
            witness = Some(ConcavityWitness { lambda, p, q });
        }
    }
    Ok(ConcavityReport {
        samples,
        max_violation: if samples == 0 { 0.0 } else { max_violation },
        witness,
    })
}
