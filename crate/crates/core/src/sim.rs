//! Monte Carlo estimation of a strategy's leakage.
//!
//! Each trial samples a secret from the prior, runs the strategy against
//! the mechanism (sampling observations from the secret's true rows), and
//! tracks the adversary's exact Bayes posterior along the way. The trial's
//! statistic is the uncertainty of the final posterior; averaging over
//! trials estimates the conditional uncertainty that
//! [`crate::leakage::leakage`] computes exactly, and the standard error
//! quantifies the Monte Carlo noise.
//!
//! Reproducibility: trial `t` draws exclusively from stream `t` of a
//! ChaCha12 generator seeded with the report's seed, and trials are
//! aggregated in index order. The same seed always yields the identical
//! report, and one trial's draws can never bleed into another's.

use rand::Rng;
use serde::Serialize;

use crate::belief::Belief;
use crate::error::{QifError, Result};
use crate::leakage::{leakage, max_leakage};
use crate::measure::UncertaintyMeasure;
use crate::mechanism::Mechanism;
use crate::random::stream_rng;
use crate::strategy::Strategy;

/// One sampled attack: the drawn secret and the query/response path the
/// strategy took against it.
#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    /// Index of the secret drawn from the prior.
    pub secret: usize,
    /// Action index issued at each step.
    pub actions: Vec<usize>,
    /// Observation index returned at each step.
    pub observations: Vec<usize>,
}

/// Draw one secret from `prior` and run `strategy` against it, sampling
/// each observation from the secret's true row. The walk stops where the
/// strategy stops (a list runs out, or a tree node has no child for the
/// observation seen).
pub fn sample_trace<R: Rng>(
    mechanism: &Mechanism,
    prior: &Belief,
    strategy: &Strategy,
    rng: &mut R,
) -> Result<Trace> {
    strategy.validate_against(mechanism)?;
    if prior.len() != mechanism.secret_count() {
        return Err(QifError::DimensionMismatch {
            expected: mechanism.secret_count(),
            got: prior.len(),
        });
    }
    Ok(sample_trace_unchecked(mechanism, prior, strategy, rng))
}

fn sample_trace_unchecked<R: Rng>(
    mechanism: &Mechanism,
    prior: &Belief,
    strategy: &Strategy,
    rng: &mut R,
) -> Trace {
    let secret = sample_index(rng, prior.probs());
    let mut actions = Vec::new();
    let mut observations = Vec::new();
    let mut cursor = Some(strategy.cursor());
    while let Some(c) = cursor {
        // validate_against guarantees every action resolves.
        let action = mechanism
            .action_index(c.action())
            .expect("validated strategy action");
        let obs = sample_index(rng, mechanism.row(action, secret));
        actions.push(action);
        observations.push(obs);
        cursor = c.child(&mechanism.observations()[obs]);
    }
    Trace {
        secret,
        actions,
        observations,
    }
}

/// Monte Carlo estimate of a strategy's leakage.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub measure: String,
    pub trials: u64,
    pub seed: u64,
    /// U at the prior (exact).
    pub prior_uncertainty: f64,
    /// Mean posterior uncertainty over the trials.
    pub conditional_estimate: f64,
    /// `prior_uncertainty - conditional_estimate`.
    pub leakage_estimate: f64,
    /// Standard error of `conditional_estimate` (sample standard deviation
    /// over the square root of the trial count; 0 for a single trial).
    pub std_error: f64,
    /// Average number of queries actually issued per trial.
    pub mean_queries: f64,
}

/// Estimate the leakage of `strategy` from `prior` by running `trials`
/// seeded attacks.
pub fn simulate(
    mechanism: &Mechanism,
    prior: &Belief,
    strategy: &Strategy,
    measure: &UncertaintyMeasure,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    assert!(trials >= 1, "simulation needs at least one trial");
    strategy.validate_against(mechanism)?;
    measure.check_dimension(mechanism.secret_count())?;
    if prior.len() != mechanism.secret_count() {
        return Err(QifError::DimensionMismatch {
            expected: mechanism.secret_count(),
            got: prior.len(),
        });
    }

    let mut stats = Vec::with_capacity(trials as usize);
    let mut total_queries = 0u64;
    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial);
        let trace = sample_trace_unchecked(mechanism, prior, strategy, &mut rng);
        let mut belief = prior.clone();
        for (&action, &obs) in trace.actions.iter().zip(&trace.observations) {
            belief = mechanism.belief_update(action, obs, &belief)?;
        }
        total_queries += trace.actions.len() as u64;
        stats.push(measure.eval(&belief)?);
    }

    let n = trials as f64;
    let mean = stats.iter().sum::<f64>() / n;
    let std_error = if trials >= 2 {
        let var = stats.iter().map(|u| (u - mean) * (u - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let prior_uncertainty = measure.eval(prior)?;
    Ok(SimulationReport {
        measure: measure.name().to_string(),
        trials,
        seed,
        prior_uncertainty,
        conditional_estimate: mean,
        leakage_estimate: prior_uncertainty - mean,
        std_error,
        mean_queries: total_queries as f64 / n,
    })
}

/// One row of a convergence probe: the exact leakage of the lock-step
/// prefix of `round` queries, and its remaining gap to the cap.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRound {
    pub round: usize,
    pub value: f64,
    /// `max_leakage - value`; nonnegative up to rounding.
    pub gap: f64,
}

/// Exact leakage of lock-step prefixes of increasing length, against the
/// mechanism's cap.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub measure: String,
    /// Cap `U(prior) - E[U(class posterior)]` the sequence approaches.
    pub max_leakage: f64,
    pub rounds: Vec<ConvergenceRound>,
}

/// Exact leakage after 1..=`max_rounds` queries of the strategy that
/// cycles through all actions in declaration order. The sequence is
/// nondecreasing and bounded by the mechanism's maximum leakage; on
/// deterministic mechanisms it reaches that cap as soon as every action
/// has been played once.
pub fn convergence_probe(
    mechanism: &Mechanism,
    prior: &Belief,
    measure: &UncertaintyMeasure,
    max_rounds: usize,
) -> Result<ConvergenceReport> {
    assert!(max_rounds >= 1, "probe needs at least one round");
    let cap = max_leakage(mechanism, prior, measure)?.value;
    let sequence: Vec<String> = mechanism
        .action_names()
        .iter()
        .cycle()
        .take(max_rounds)
        .cloned()
        .collect();
    let mut rounds = Vec::with_capacity(max_rounds);
    for round in 1..=max_rounds {
        let prefix = Strategy::NonAdaptive(sequence[..round].to_vec());
        let value = leakage(mechanism, prior, &prefix, measure)?.leakage;
        rounds.push(ConvergenceRound {
            round,
            value,
            gap: cap - value,
        });
    }
    Ok(ConvergenceReport {
        measure: measure.name().to_string(),
        max_leakage: cap,
        rounds,
    })
}

/// Sample an index from a probability row via inverse CDF.
fn sample_index<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_positive = i;
        if u < cumulative {
            return i;
        }
    }
    // Rounding can leave the cumulative sum a hair under 1; attribute the
    // sliver to the last positive entry.
    last_positive
}
