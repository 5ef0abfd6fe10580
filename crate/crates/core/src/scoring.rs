//! Proper scoring rules derived from concave uncertainty measures.
//!
//! For a concave measure U with supporting hyperplane coefficients c(q) at a
//! forecast q (a supergradient of U), scoring the realized secret x_i as
//!
//! ```text
//! S(x_i, q) = U(q) + c_i(q) - <c(q), q>
//! ```
//!
//! gives expected score S(p, q) = U(q) + <c(q), p - q> >= U(p) under the true
//! distribution p, with equality at q = p. Reporting the true belief is
//! therefore optimal in expectation (the rule is proper), and the optimal
//! expected score equals the uncertainty U(p) itself.
//!
//! Supported measures and their coefficients at interior forecasts:
//!
//! - `shannon`: c_i = -log2 q_i - log2(e), yielding the logarithmic score
//!   S(x_i, q) = -log2 q_i after the constants cancel;
//! - `error`: c_i = -1 at the smallest index attaining max q, 0 elsewhere,
//!   yielding S(x_i, q) = 1 unless x_i is that modal index;
//! - `variance`: c_i = v_i^2 - 2 E_q[V] v_i, yielding the squared error
//!   S(x_i, q) = (v_i - E_q[V])^2 up to the shared constant E_q[V]^2 that the
//!   hyperplane formula cancels;
//! - custom measures that supply a subgradient closure.
//!
//! `guessing` has no usable subgradient here: its supporting hyperplanes
//! change with the sort order and do not produce a bounded proper rule, so
//! requesting it fails rather than returning something improper.
//!
//! Forecasts must be interior (every secret gets positive probability).
//! Boundary forecasts are rejected: the logarithmic score is infinite there
//! and one-sided supergradients would silently break propriety.

use crate::belief::Belief;
use crate::error::{QifError, Result};
use crate::measure::UncertaintyMeasure;

/// A proper scoring rule for an uncertainty measure.
#[derive(Clone, Debug)]
pub struct ScoringRule {
    measure: UncertaintyMeasure,
}

/// Build the scoring rule for a measure, failing for measures without a
/// supporting-hyperplane construction.
pub fn scoring_rule(measure: &UncertaintyMeasure) -> Result<ScoringRule> {
    match measure {
        UncertaintyMeasure::Guessing => Err(QifError::NoSubgradient(
            "guessing entropy has no bounded supporting hyperplane away from ties".to_string(),
        )),
        UncertaintyMeasure::Custom {
            name,
            subgradient_fn: None,
            ..
        } => Err(QifError::NoSubgradient(format!(
            "custom measure `{name}` supplies no subgradient"
        ))),
        m => Ok(ScoringRule { measure: m.clone() }),
    }
}

impl ScoringRule {
    /// The measure this rule scores against.
    pub fn measure(&self) -> &UncertaintyMeasure {
        &self.measure
    }

    /// Supporting-hyperplane coefficients of the measure at an interior
    /// forecast.
    pub fn coefficients(&self, forecast: &Belief) -> Result<Vec<f64>> {
        self.measure.check_dimension(forecast.len())?;
        if !forecast.is_interior() {
            return Err(QifError::BoundaryForecast);
        }
        let q = forecast.probs();
        Ok(match &self.measure {
            UncertaintyMeasure::Shannon => {
                q.iter().map(|&qi| -qi.log2() - std::f64::consts::LOG2_E).collect()
            }
            UncertaintyMeasure::Error => {
                // Smallest index attaining the maximum, matching the
                // guess-tie convention used everywhere else.
                let modal = q
                    .iter()
                    .enumerate()
                    .max_by(|(i, a), (j, b)| a.partial_cmp(b).unwrap().then(j.cmp(i)))
                    .map(|(i, _)| i)
                    .expect("forecast is nonempty");
                (0..q.len()).map(|i| if i == modal { -1.0 } else { 0.0 }).collect()
            }
            UncertaintyMeasure::Variance { secret_values } => {
                let mean: f64 = q.iter().zip(secret_values).map(|(&qi, &v)| qi * v).sum();
                secret_values.iter().map(|&v| v * v - 2.0 * mean * v).collect()
            }
            UncertaintyMeasure::Guessing => unreachable!("rejected in scoring_rule"),
            UncertaintyMeasure::Custom { subgradient_fn, name, .. } => {
                let f = subgradient_fn
                    .as_ref()
                    .unwrap_or_else(|| unreachable!("rejected in scoring_rule"));
                let c = f(forecast);
                if c.len() != q.len() {
                    return Err(QifError::NoSubgradient(format!(
                        "custom measure `{name}` returned {} coefficients for dimension {}",
                        c.len(),
                        q.len()
                    )));
                }
                c
            }
        })
    }

    /// Score awarded when secret `secret` is realized under forecast
    /// `forecast`. Lower is better: the score is a penalty whose expectation
    /// a truthful forecaster minimizes down to U(truth).
    pub fn score(&self, secret: usize, forecast: &Belief) -> Result<f64> {
        if secret >= forecast.len() {
            return Err(QifError::DimensionMismatch {
                expected: forecast.len(),
                got: secret + 1,
            });
        }
        let c = self.coefficients(forecast)?;
        let inner: f64 = c.iter().zip(forecast.probs()).map(|(ci, qi)| ci * qi).sum();
        Ok(self.measure.eval(forecast)? + c[secret] - inner)
    }

    /// Expected score of forecast `forecast` when secrets are drawn from
    /// `truth`. Propriety: this is at least `U(truth)`, with equality at
    /// `forecast == truth`.
    pub fn expected_score(&self, truth: &Belief, forecast: &Belief) -> Result<f64> {
        if truth.len() != forecast.len() {
            return Err(QifError::DimensionMismatch {
                expected: forecast.len(),
                got: truth.len(),
            });
        }
        let c = self.coefficients(forecast)?;
        let inner_q: f64 = c.iter().zip(forecast.probs()).map(|(ci, qi)| ci * qi).sum();
        let inner_p: f64 = c.iter().zip(truth.probs()).map(|(ci, pi)| ci * pi).sum();
        Ok(self.measure.eval(forecast)? + inner_p - inner_q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureKind;
    use crate::random::{interior_belief, rng};
    use approx::assert_abs_diff_eq;

    fn b(probs: &[f64]) -> Belief {
        Belief::new(probs.to_vec()).unwrap()
    }

    #[test]
    fn shannon_rule_is_the_log_score() {
        let rule = scoring_rule(&UncertaintyMeasure::Shannon).unwrap();
        let q = b(&[0.25, 0.75]);
        assert_abs_diff_eq!(rule.score(0, &q).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            rule.score(1, &q).unwrap(),
            -(0.75_f64.log2()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn error_rule_charges_misses() {
        let rule = scoring_rule(&UncertaintyMeasure::Error).unwrap();
        let q = b(&[0.7, 0.3]);
        assert_abs_diff_eq!(rule.score(0, &q).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.score(1, &q).unwrap(), 1.0, epsilon = 1e-12);
        // At a tie the smallest modal index is the free guess.
        let tie = b(&[0.5, 0.5]);
        assert_abs_diff_eq!(rule.score(0, &tie).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.score(1, &tie).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn variance_rule_is_squared_error() {
        let m = UncertaintyMeasure::from_kind(MeasureKind::Variance, Some(&[0.0, 1.0, 4.0]))
            .unwrap();
        let rule = scoring_rule(&m).unwrap();
        let q = b(&[0.5, 0.25, 0.25]);
        let mean = 0.25 + 1.0;
        for (i, v) in [0.0, 1.0, 4.0].iter().enumerate() {
            assert_abs_diff_eq!(
                rule.score(i, &q).unwrap(),
                (v - mean) * (v - mean),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn truthful_expected_score_is_the_uncertainty() {
        let mut r = rng(11);
        for kind in [MeasureKind::Shannon, MeasureKind::Error, MeasureKind::Variance] {
            let m = UncertaintyMeasure::from_kind(kind, Some(&[2.0, 3.0, 5.0, 7.0])).unwrap();
            let rule = scoring_rule(&m).unwrap();
            for _ in 0..50 {
                let p = interior_belief(&mut r, 4);
                assert_abs_diff_eq!(
                    rule.expected_score(&p, &p).unwrap(),
                    m.eval(&p).unwrap(),
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn lying_never_pays() {
        let mut r = rng(23);
        for kind in [MeasureKind::Shannon, MeasureKind::Error, MeasureKind::Variance] {
            let m = UncertaintyMeasure::from_kind(kind, Some(&[1.0, 4.0, 9.0])).unwrap();
            let rule = scoring_rule(&m).unwrap();
            for _ in 0..200 {
                let p = interior_belief(&mut r, 3);
                let q = interior_belief(&mut r, 3);
                let gap = rule.expected_score(&p, &q).unwrap() - m.eval(&p).unwrap();
                assert!(gap >= -1e-9, "{}: propriety gap {}", m.name(), gap);
            }
        }
    }

    #[test]
    fn guessing_and_boundary_are_rejected() {
        assert!(matches!(
            scoring_rule(&UncertaintyMeasure::Guessing),
            Err(QifError::NoSubgradient(_))
        ));
        let rule = scoring_rule(&UncertaintyMeasure::Shannon).unwrap();
        assert!(matches!(
            rule.score(0, &b(&[0.0, 1.0])),
            Err(QifError::BoundaryForecast)
        ));
    }

    #[test]
    fn custom_rule_uses_supplied_subgradient() {
        use std::sync::Arc;
        // Quadratic (Brier-flavored) uncertainty 1 - sum q_i^2 with gradient
        // -2 q_i; its hyperplane rule is the Brier score up to constants.
        let m = UncertaintyMeasure::Custom {
            name: "quadratic".to_string(),
            value_fn: Arc::new(|b: &Belief| 1.0 - b.probs().iter().map(|p| p * p).sum::<f64>()),
            subgradient_fn: Some(Arc::new(|b: &Belief| {
                b.probs().iter().map(|p| -2.0 * p).collect()
            })),
        };
        let rule = scoring_rule(&m).unwrap();
        let p = b(&[0.6, 0.4]);
        assert_abs_diff_eq!(
            rule.expected_score(&p, &p).unwrap(),
            m.eval(&p).unwrap(),
            epsilon = 1e-12
        );
        let q = b(&[0.2, 0.8]);
        assert!(rule.expected_score(&p, &q).unwrap() >= m.eval(&p).unwrap() - 1e-12);
    }
}
