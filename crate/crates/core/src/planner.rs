//! Optimal attack planning over a finite horizon.
//!
//! The planner maximizes leakage over all strategies of length at most `h`
//! by backward induction on the chain rule: the value of a belief with `l`
//! queries left is
//!
//! ```text
//! V(p, 0) = 0
//! V(p, l) = max_a [ I_a(p) + sum_y q_a(y) V(p^{a,y}, l - 1) ]
//! ```
//!
//! where `I_a` is the single-query leakage of action `a`, `q_a` the
//! observation distribution it induces, and `p^{a,y}` the Bayes update.
//! Zero-probability observations contribute nothing and are skipped. Ties
//! between actions go to the smaller declaration index, so results are
//! deterministic.
//!
//! The recursion touches at most `(|observations| * |actions|)^(h+1) - 1`
//! decision nodes; [`size_estimate`] computes that bound and the planner
//! refuses up front when it exceeds the node budget, rather than stalling.
//!
//! [`exhaustive_best`] is the planner's independent check: it enumerates
//! every complete strategy tree of the same depth and takes the best by
//! direct evaluation. It is exponentially more expensive and capped by
//! [`ORACLE_STRATEGY_LIMIT`]; tests compare the two on small instances.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::belief::Belief;
use crate::error::{QifError, Result};
use crate::leakage::leakage;
use crate::measure::UncertaintyMeasure;
use crate::mechanism::Mechanism;
use crate::strategy::{Strategy, StrategyNode};
use crate::PRUNE_EPSILON;

/// Default cap on the planner's a-priori decision-node estimate.
pub const DEFAULT_PLANNER_BUDGET: u128 = 10_000_000;

/// Cap on the number of strategies the exhaustive oracle will evaluate.
pub const ORACLE_STRATEGY_LIMIT: u128 = 100_000;

/// Near-ties within this margin keep the earlier (smaller-index) action, so
/// tie-breaking is stable under float noise.
const TIE_EPSILON: f64 = 1e-12;

/// An optimal plan and how it was found.
#[derive(Clone, Debug, Serialize)]
pub struct PlanReport {
    pub measure: String,
    /// Maximum number of queries allowed.
    pub horizon: usize,
    /// Leakage of the optimal strategy.
    pub value: f64,
    /// An optimal strategy tree (smallest action indices among ties).
    pub strategy: Strategy,
    /// Value of committing to each action first, in declaration order; the
    /// plan's root action attains the maximum.
    pub root_values: Vec<ActionValue>,
    /// Decision nodes actually evaluated.
    pub nodes_expanded: u64,
    /// A-priori bound on decision nodes (see [`size_estimate`]).
    pub estimated_nodes: u128,
}

/// Value of starting with one particular action.
#[derive(Clone, Debug, Serialize)]
pub struct ActionValue {
    pub action: String,
    pub value: f64,
}

/// Upper bound on decision nodes for a horizon-`h` plan:
/// `(|observations| * |actions|)^(h+1) - 1`, saturating on overflow.
pub fn size_estimate(mechanism: &Mechanism, horizon: usize) -> u128 {
    let base = (mechanism.observation_count() as u128)
        .checked_mul(mechanism.action_count() as u128);
    let exponent = u32::try_from(horizon + 1).ok();
    match (base, exponent) {
        (Some(base), Some(exp)) => base
            .checked_pow(exp)
            .map_or(u128::MAX, |bound| bound.saturating_sub(1)),
        _ => u128::MAX,
    }
}

/// A-priori cost bounds for a planning run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SizeEstimate {
    /// Decision-node bound `(|observations| * |actions|)^(horizon+1) - 1`;
    /// the quantity checked against the node budget.
    pub decision_nodes: u128,
    /// Work bound `|secrets| * (|observations| * |actions|)^(horizon+1)`,
    /// accounting for the belief vector carried at each node.
    pub work: u128,
}

/// Both cost bounds for planning `horizon` queries against `mechanism`,
/// saturating on overflow.
pub fn mdp_size_estimate(mechanism: &Mechanism, horizon: usize) -> SizeEstimate {
    let decision_nodes = size_estimate(mechanism, horizon);
    let work = decision_nodes
        .saturating_add(1)
        .saturating_mul(mechanism.secret_count() as u128);
    SizeEstimate {
        decision_nodes,
        work,
    }
}

/// Compute an optimal strategy of length at most `horizon` (at least 1)
/// from `prior`, maximizing leakage under `measure`.
///
/// `node_budget` caps the a-priori size estimate
/// ([`DEFAULT_PLANNER_BUDGET`] when `None`); estimates above it fail with
/// [`QifError::BudgetExceeded`] before any search starts.
pub fn plan(
    mechanism: &Mechanism,
    prior: &Belief,
    horizon: usize,
    measure: &UncertaintyMeasure,
    node_budget: Option<u128>,
) -> Result<PlanReport> {
    assert!(horizon >= 1, "planning needs at least one query");
    measure.check_dimension(mechanism.secret_count())?;
    if prior.len() != mechanism.secret_count() {
        return Err(QifError::DimensionMismatch {
            expected: mechanism.secret_count(),
            got: prior.len(),
        });
    }
    let estimated_nodes = size_estimate(mechanism, horizon);
    let budget = node_budget.unwrap_or(DEFAULT_PLANNER_BUDGET);
    if estimated_nodes > budget {
        return Err(QifError::BudgetExceeded {
            estimate: estimated_nodes,
            budget,
        });
    }

    let mut nodes_expanded = 1u64; // the root decision node
    let mut root_values = Vec::with_capacity(mechanism.action_count());
    let mut best: Option<(f64, StrategyNode)> = None;
    for action in 0..mechanism.action_count() {
        let (value, children) =
            action_value(mechanism, prior, action, horizon - 1, measure, &mut nodes_expanded)?;
        root_values.push(ActionValue {
            action: mechanism.action_names()[action].clone(),
            value,
        });
        if best.as_ref().map_or(true, |(b, _)| value > b + TIE_EPSILON) {
            best = Some((
                value,
                StrategyNode {
                    action: mechanism.action_names()[action].clone(),
                    children,
                },
            ));
        }
    }
    let (value, root) = best.expect("mechanisms declare at least one action");
    Ok(PlanReport {
        measure: measure.name().to_string(),
        horizon,
        value,
        strategy: Strategy::Tree(root),
        root_values,
        nodes_expanded,
        estimated_nodes,
    })
}

/// Value of playing `action` now with `remaining` queries afterwards, plus
/// the optimal children per observation.
fn action_value(
    mechanism: &Mechanism,
    belief: &Belief,
    action: usize,
    remaining: usize,
    measure: &UncertaintyMeasure,
    nodes_expanded: &mut u64,
) -> Result<(f64, BTreeMap<String, StrategyNode>)> {
    let dist = mechanism.observation_dist(action, belief)?;
    let prior_uncertainty = measure.eval(belief)?;
    let mut conditional = 0.0;
    let mut continuation = 0.0;
    let mut children = BTreeMap::new();
    for (y, &q) in dist.iter().enumerate() {
        if q <= PRUNE_EPSILON {
            continue;
        }
        let posterior = mechanism.belief_update(action, y, belief)?;
        conditional += q * measure.eval(&posterior)?;
        if remaining >= 1 {
            let (child_value, child) =
                solve(mechanism, &posterior, remaining, measure, nodes_expanded)?;
            continuation += q * child_value;
            children.insert(mechanism.observations()[y].clone(), child);
        }
    }
    Ok((prior_uncertainty - conditional + continuation, children))
}

fn solve(
    mechanism: &Mechanism,
    belief: &Belief,
    horizon: usize,
    measure: &UncertaintyMeasure,
    nodes_expanded: &mut u64,
) -> Result<(f64, StrategyNode)> {
    *nodes_expanded += 1;
    let mut best: Option<(f64, StrategyNode)> = None;
    for action in 0..mechanism.action_count() {
        let (value, children) =
            action_value(mechanism, belief, action, horizon - 1, measure, nodes_expanded)?;
        if best.as_ref().map_or(true, |(b, _)| value > b + TIE_EPSILON) {
            best = Some((
                value,
                StrategyNode {
                    action: mechanism.action_names()[action].clone(),
                    children,
                },
            ));
        }
    }
    Ok(best.expect("mechanisms declare at least one action"))
}

/// The exhaustive oracle's result.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub measure: String,
    pub horizon: usize,
    /// Best leakage over all enumerated strategies.
    pub value: f64,
    /// First enumerated strategy attaining it.
    pub strategy: Strategy,
    /// Number of strategies evaluated.
    pub strategies_evaluated: u128,
}

/// Find an optimal depth-`horizon` strategy by enumerating every complete
/// strategy tree and evaluating each one's leakage directly.
///
/// Extra queries never decrease optimal leakage, so the best complete
/// depth-`horizon` tree is also optimal among all strategies of length at
/// most `horizon`. The candidate count is `|actions|^M` with `M` the number
/// of tree positions; anything above `limit`
/// ([`ORACLE_STRATEGY_LIMIT`] when `None`) is rejected.
pub fn exhaustive_best(
    mechanism: &Mechanism,
    prior: &Belief,
    horizon: usize,
    measure: &UncertaintyMeasure,
    limit: Option<u128>,
) -> Result<OracleReport> {
    assert!(horizon >= 1, "the oracle needs at least one query");
    measure.check_dimension(mechanism.secret_count())?;
    let limit = limit.unwrap_or(ORACLE_STRATEGY_LIMIT);
    let actions = mechanism.action_count() as u128;
    let obs = mechanism.observation_count();

    // Positions of a complete obs-ary tree of depth `horizon`, level sizes
    // 1, obs, obs^2, ...
    let mut positions = 0u128;
    let mut level = 1u128;
    for _ in 0..horizon {
        positions = positions.saturating_add(level);
        level = level.saturating_mul(obs as u128);
    }
    let count = positions
        .try_into()
        .ok()
        .and_then(|p: u32| actions.checked_pow(p))
        .unwrap_or(u128::MAX);
    if count > limit {
        return Err(QifError::TooManyStrategies { count, limit });
    }
    let positions = positions as usize;

    let mut digits = vec![0usize; positions];
    let mut best: Option<(f64, Strategy)> = None;
    let mut evaluated = 0u128;
    loop {
        let candidate = Strategy::Tree(tree_from_digits(mechanism, &digits, 0, horizon));
        let value = leakage(mechanism, prior, &candidate, measure)?.leakage;
        evaluated += 1;
        if best.as_ref().map_or(true, |(b, _)| value > b + TIE_EPSILON) {
            best = Some((value, candidate));
        }
        // Odometer increment over action indices.
        let mut i = 0;
        loop {
            if i == digits.len() {
                let (value, strategy) = best.expect("at least one candidate was evaluated");
                return Ok(OracleReport {
                    measure: measure.name().to_string(),
                    horizon,
                    value,
                    strategy,
                    strategies_evaluated: evaluated,
                });
            }
            digits[i] += 1;
            if digits[i] < actions as usize {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Build the strategy tree for one odometer state. Positions use the heap
/// layout of a complete obs-ary tree: children of `i` start at
/// `i * obs + 1`.
fn tree_from_digits(
    mechanism: &Mechanism,
    digits: &[usize],
    position: usize,
    depth_left: usize,
) -> StrategyNode {
    let obs = mechanism.observation_count();
    let children = if depth_left > 1 {
        mechanism
            .observations()
            .iter()
            .enumerate()
            .map(|(j, label)| {
                (
                    label.clone(),
                    tree_from_digits(mechanism, digits, position * obs + 1 + j, depth_left - 1),
                )
            })
            .collect()
    } else {
        BTreeMap::new()
    };
    StrategyNode {
        action: mechanism.action_names()[digits[position]].clone(),
        children,
    }
}
