//! Leakage: how much a strategy reduces uncertainty about the secret.
//!
//! For a concave uncertainty measure U, the leakage of strategy sigma from
//! prior p is `U(p) - U_sigma(p)`, where `U_sigma(p)` is the expected value
//! of U over the posterior beliefs at the leaves of the attack tree. It is
//! nonnegative, zero on uninformative strategies, and capped by what the
//! mechanism can distinguish at all:
//!
//! - [`max_leakage`] computes that cap for a given prior as the leakage of
//!   learning the secret's indistinguishability class exactly;
//! - [`capacity`] gives the closed-form supremum over priors when one is
//!   known (`log2 K` for Shannon, `1 - 1/K` for error, with K classes);
//! - [`capacity_search`] estimates the supremum numerically by hill
//!   climbing over priors supported on class representatives.
//!
//! [`chain_decomposition`] splits a strategy's leakage into the first
//! query's contribution plus the expected leakage of the per-observation
//! remainder strategies; the parts recombine to the whole, which is the
//! recursion every dynamic-programming planner in this crate relies on.

use serde::Serialize;

use crate::attack::build_attack_tree;
use crate::belief::Belief;
use crate::error::{QifError, Result};
use crate::measure::{MeasureKind, UncertaintyMeasure};
use crate::mechanism::Mechanism;
use crate::random::{interior_belief, rng};
use crate::strategy::Strategy;
use crate::PRUNE_EPSILON;

/// Leakage of one strategy from one prior.
#[derive(Clone, Debug, Serialize)]
pub struct LeakageReport {
    /// Measure name.
    pub measure: String,
    /// U at the prior.
    pub prior_uncertainty: f64,
    /// Expected U over the attack tree leaves.
    pub conditional_uncertainty: f64,
    /// `prior_uncertainty - conditional_uncertainty`.
    pub leakage: f64,
    /// Maximum number of queries the strategy issues.
    pub strategy_length: usize,
    /// Number of positive-probability traces (attack tree leaves).
    pub trace_count: usize,
}

/// Compute the leakage of `strategy` from `prior` under `measure`.
pub fn leakage(
    mechanism: &Mechanism,
    prior: &Belief,
    strategy: &Strategy,
    measure: &UncertaintyMeasure,
) -> Result<LeakageReport> {
    measure.check_dimension(mechanism.secret_count())?;
    let tree = build_attack_tree(mechanism, prior, strategy, None)?;
    let prior_uncertainty = measure.eval(prior)?;
    let conditional_uncertainty = tree.conditional_uncertainty(measure)?;
    Ok(LeakageReport {
        measure: measure.name().to_string(),
        prior_uncertainty,
        conditional_uncertainty,
        leakage: prior_uncertainty - conditional_uncertainty,
        strategy_length: strategy.length(),
        trace_count: tree.leaves().len(),
    })
}

/// Leakage of playing a single action once from `prior`.
pub fn single_query_leakage(
    mechanism: &Mechanism,
    prior: &Belief,
    action: usize,
    measure: &UncertaintyMeasure,
) -> Result<f64> {
    measure.check_dimension(mechanism.secret_count())?;
    let dist = mechanism.observation_dist(action, prior)?;
    let mut conditional = 0.0;
    for (y, &q) in dist.iter().enumerate() {
        if q <= PRUNE_EPSILON {
            continue;
        }
        let posterior = mechanism.belief_update(action, y, prior)?;
        conditional += q * measure.eval(&posterior)?;
    }
    Ok(measure.eval(prior)? - conditional)
}

/// The information cap of a mechanism at a fixed prior.
#[derive(Clone, Debug, Serialize)]
pub struct MaxLeakageReport {
    pub measure: String,
    /// Number of indistinguishability classes.
    pub classes: usize,
    pub prior_uncertainty: f64,
    /// Expected U after learning the secret's class exactly.
    pub conditional_uncertainty: f64,
    /// `prior_uncertainty - conditional_uncertainty`; no strategy of any
    /// length leaks more from this prior.
    pub value: f64,
}

/// Leakage of the best possible outcome: learning the secret's
/// indistinguishability class. No strategy exceeds this from `prior`.
pub fn max_leakage(
    mechanism: &Mechanism,
    prior: &Belief,
    measure: &UncertaintyMeasure,
) -> Result<MaxLeakageReport> {
    measure.check_dimension(mechanism.secret_count())?;
    if prior.len() != mechanism.secret_count() {
        return Err(QifError::DimensionMismatch {
            expected: mechanism.secret_count(),
            got: prior.len(),
        });
    }
    let partition = mechanism.indistinguishability();
    let mut conditional = 0.0;
    for class in partition.classes() {
        let mass: f64 = class.iter().map(|&x| prior.prob(x)).sum();
        if mass <= 0.0 {
            continue;
        }
        let mut cond = vec![0.0; prior.len()];
        for &x in class {
            cond[x] = prior.prob(x) / mass;
        }
        conditional += mass * measure.eval(&Belief::from_normalized(cond))?;
    }
    let prior_uncertainty = measure.eval(prior)?;
    Ok(MaxLeakageReport {
        measure: measure.name().to_string(),
        classes: partition.count(),
        prior_uncertainty,
        conditional_uncertainty: conditional,
        value: prior_uncertainty - conditional,
    })
}

/// Closed-form capacity (supremum of max leakage over priors).
#[derive(Clone, Debug, Serialize)]
pub struct CapacityReport {
    pub measure: String,
    pub classes: usize,
    pub value: f64,
}

/// Capacity of the mechanism for measures with a closed form: with K
/// indistinguishability classes, `log2 K` for Shannon and `1 - 1/K` for
/// error. Other measures have no closed form here and are rejected.
pub fn capacity(mechanism: &Mechanism, kind: MeasureKind) -> Result<CapacityReport> {
    let classes = mechanism.indistinguishability().count();
    let value = match kind {
        MeasureKind::Shannon => (classes as f64).log2(),
        MeasureKind::Error => 1.0 - 1.0 / classes as f64,
        other => return Err(QifError::UnsupportedMeasure(other.name().to_string())),
    };
    Ok(CapacityReport {
        measure: kind.name().to_string(),
        classes,
        value,
    })
}

/// Result of the numeric capacity search.
#[derive(Clone, Debug, Serialize)]
pub struct CapacitySearchReport {
    pub measure: String,
    pub classes: usize,
    /// Best max-leakage value found.
    pub value: f64,
    /// Prior attaining it (over all secrets; zero off the representatives).
    pub prior: Belief,
    pub restarts: u32,
}

/// Numerically search for the prior maximizing [`max_leakage`].
///
/// The search space is priors supported on one representative per
/// indistinguishability class: moving mass within a class never changes
/// what is learnable about the class, and concentrating it leaves nothing
/// to be uncertain about afterwards, so the supremum over all priors is
/// attained there for the built-in measures. Within that simplex the
/// objective is concave for the built-ins, so hill climbing with restarts
/// is reliable; it is still a heuristic for custom measures.
pub fn capacity_search(
    mechanism: &Mechanism,
    measure: &UncertaintyMeasure,
    restarts: u32,
    seed: u64,
) -> Result<CapacitySearchReport> {
    measure.check_dimension(mechanism.secret_count())?;
    let partition = mechanism.indistinguishability();
    let reps = partition.representatives();
    let k = reps.len();
    let n = mechanism.secret_count();

    let evaluate = |weights: &[f64]| -> Result<(f64, Belief)> {
        let mut full = vec![0.0; n];
        for (i, &rep) in reps.iter().enumerate() {
            full[rep] = weights[i];
        }
        let prior = Belief::from_normalized(full);
        let value = max_leakage(mechanism, &prior, measure)?.value;
        Ok((value, prior))
    };

    let mut r = rng(seed);
    let mut best: Option<(f64, Belief)> = None;
    for restart in 0..restarts.max(1) {
        // First restart from the uniform center, the rest from random
        // interior points.
        let mut weights = if restart == 0 {
            vec![1.0 / k as f64; k]
        } else {
            interior_belief(&mut r, k).probs().to_vec()
        };
        let mut current = evaluate(&weights)?.0;
        // Pairwise mass-transfer hill climb with a shrinking step.
        for &step in &[0.25f64, 0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5] {
            loop {
                let mut improved = false;
                for from in 0..k {
                    for to in 0..k {
                        if from == to || weights[from] < 1e-15 {
                            continue;
                        }
                        let moved = step.min(weights[from]);
                        weights[from] -= moved;
                        weights[to] += moved;
                        let candidate = evaluate(&weights)?.0;
                        if candidate > current + 1e-13 {
                            current = candidate;
                            improved = true;
                        } else {
                            weights[from] += moved;
                            weights[to] -= moved;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }
        let (value, prior) = evaluate(&weights)?;
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, prior));
        }
    }
    let (value, prior) = best.expect("at least one restart runs");
    Ok(CapacitySearchReport {
        measure: measure.name().to_string(),
        classes: k,
        value,
        prior,
        restarts: restarts.max(1),
    })
}

/// One observation branch of a chain decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct ChainBranch {
    pub observation: String,
    /// Probability of the observation under the first query.
    pub weight: f64,
    /// Leakage of the remainder strategy from the updated belief; 0 when
    /// the strategy stops on this observation.
    pub leakage: f64,
}

/// A strategy's leakage split across its first query.
#[derive(Clone, Debug, Serialize)]
pub struct ChainDecomposition {
    pub measure: String,
    /// Action of the first query.
    pub head_action: String,
    /// Leakage of the first query alone.
    pub head_leakage: f64,
    pub branches: Vec<ChainBranch>,
    /// `head_leakage` plus the weighted branch leakages.
    pub recombined: f64,
    /// Leakage of the whole strategy, computed directly; equals
    /// `recombined` up to rounding.
    pub total: f64,
}

/// Split the leakage of `strategy` into first-query and remainder terms:
///
/// ```text
/// I_sigma(p) = I_a(p) + sum_y q(y) I_{sigma_y}(p^{a,y})
/// ```
///
/// where `a` is the first action, `q` the observation distribution it
/// induces, `sigma_y` the derivative strategy, and `p^{a,y}` the Bayes
/// update. The report carries both sides so tests can pin their equality.
pub fn chain_decomposition(
    mechanism: &Mechanism,
    prior: &Belief,
    strategy: &Strategy,
    measure: &UncertaintyMeasure,
) -> Result<ChainDecomposition> {
    strategy.validate_against(mechanism)?;
    let total = leakage(mechanism, prior, strategy, measure)?.leakage;
    let head = match strategy {
        Strategy::NonAdaptive(actions) => actions[0].clone(),
        Strategy::Tree(root) => root.action.clone(),
    };
    let action = mechanism.action_index(&head)?;
    let head_leakage = single_query_leakage(mechanism, prior, action, measure)?;
    let dist = mechanism.observation_dist(action, prior)?;
    let mut branches = Vec::new();
    let mut recombined = head_leakage;
    for (y, &weight) in dist.iter().enumerate() {
        if weight <= PRUNE_EPSILON {
            continue;
        }
        let obs = mechanism.observations()[y].clone();
        let branch_leakage = match strategy.derivative(&obs) {
            Some(rest) => {
                let posterior = mechanism.belief_update(action, y, prior)?;
                leakage(mechanism, &posterior, &rest, measure)?.leakage
            }
            None => 0.0,
        };
        recombined += weight * branch_leakage;
        branches.push(ChainBranch {
            observation: obs,
            weight,
            leakage: branch_leakage,
        });
    }
    Ok(ChainDecomposition {
        measure: measure.name().to_string(),
        head_action: head,
        head_leakage,
        branches,
        recombined,
        total,
    })
}
