//! Attack trees: the belief dynamics of running a strategy.
//!
//! Playing a strategy against a mechanism unfolds into a tree. Each node
//! carries the adversary's current belief and the probability of reaching it
//! (the product of arc probabilities from the root); each arc carries an
//! observation and its probability under the node's action and belief.
//! Children are Bayes updates. Arcs whose observation probability is below
//! the pruning threshold are dropped: they occur with probability 0 and
//! their posteriors are undefined.
//!
//! The expected posterior uncertainty of the strategy is the
//! reach-probability-weighted sum of a measure over the leaf beliefs, and
//! leakage is the prior uncertainty minus that. Concavity of the measure
//! makes this nonnegative.

use std::fmt::Write as _;

use serde::Serialize;

use crate::belief::Belief;
use crate::error::{QifError, Result};
use crate::measure::UncertaintyMeasure;
use crate::mechanism::Mechanism;
use crate::numfmt::{fraction_or_decimal, sig12};
use crate::strategy::{escape, Strategy, StrategyCursor};
use crate::PRUNE_EPSILON;

/// Default cap on attack tree nodes. A node stores a belief, so this bounds
/// memory at roughly a gigabyte for ten-secret mechanisms.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// One node of an unfolded attack.
#[derive(Clone, Debug, Serialize)]
pub struct AttackNode {
    /// Adversary belief at this point.
    pub belief: Belief,
    /// Probability of reaching this node from the root.
    pub reach_prob: f64,
    /// Action queried here; `None` at leaves.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    /// Outgoing arcs, in observation-index order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub arcs: Vec<AttackArc>,
}

/// One observation arc of an attack tree.
#[derive(Clone, Debug, Serialize)]
pub struct AttackArc {
    /// Observation label.
    pub observation: String,
    /// Probability of this observation at the parent node.
    pub probability: f64,
    pub child: AttackNode,
}

/// A fully unfolded strategy run.
#[derive(Clone, Debug, Serialize)]
pub struct AttackTree {
    pub root: AttackNode,
    /// Total number of nodes, leaves included.
    pub node_count: usize,
}

impl AttackTree {
    /// Leaf nodes in depth-first, observation-index order. Their reach
    /// probabilities sum to 1.
    pub fn leaves(&self) -> Vec<&AttackNode> {
        let mut out = Vec::new();
        collect_leaves(&self.root, &mut out);
        out
    }

    /// Expected value of `measure` over the leaf beliefs, weighted by reach
    /// probability: the posterior uncertainty after running the strategy.
    ///
    /// Summation follows the depth-first leaf order, so results are
    /// bit-for-bit reproducible.
    pub fn conditional_uncertainty(&self, measure: &UncertaintyMeasure) -> Result<f64> {
        let mut total = 0.0;
        for leaf in self.leaves() {
            total += leaf.reach_prob * measure.eval(&leaf.belief)?;
        }
        Ok(total)
    }

    /// GraphViz rendering: nodes show the action (or the belief at leaves),
    /// arcs show the observation and its probability.
    pub fn to_dot(&self, mechanism: &Mechanism) -> String {
        let mut out = String::from(
            "digraph attack {\n  rankdir=TB;\n  node [shape=box];\n",
        );
        let mut next_id = 0;
        dot_node(&self.root, mechanism, &mut next_id, &mut out);
        out.push_str("}\n");
        out
    }
}

/// Unfold `strategy` against `mechanism` starting from `prior`.
///
/// `node_budget` caps the tree size ([`DEFAULT_NODE_BUDGET`] when `None`);
/// exceeding it fails with the node count at the point of abandonment.
pub fn build_attack_tree(
    mechanism: &Mechanism,
    prior: &Belief,
    strategy: &Strategy,
    node_budget: Option<usize>,
) -> Result<AttackTree> {
    strategy.validate_against(mechanism)?;
    if prior.len() != mechanism.secret_count() {
        return Err(QifError::DimensionMismatch {
            expected: mechanism.secret_count(),
            got: prior.len(),
        });
    }
    let budget = node_budget.unwrap_or(DEFAULT_NODE_BUDGET);
    let mut node_count = 0usize;
    let root = grow(
        mechanism,
        prior.clone(),
        1.0,
        Some(strategy.cursor()),
        budget,
        &mut node_count,
    )?;
    Ok(AttackTree { root, node_count })
}

fn grow(
    mechanism: &Mechanism,
    belief: Belief,
    reach_prob: f64,
    cursor: Option<StrategyCursor<'_>>,
    budget: usize,
    node_count: &mut usize,
) -> Result<AttackNode> {
    *node_count += 1;
    if *node_count > budget {
        return Err(QifError::BudgetExceeded {
            estimate: *node_count as u128,
            budget: budget as u128,
        });
    }
    let Some(cursor) = cursor else {
        return Ok(AttackNode {
            belief,
            reach_prob,
            action: None,
            arcs: Vec::new(),
        });
    };
    let action = mechanism.action_index(cursor.action())?;
    let dist = mechanism.observation_dist(action, &belief)?;
    let mut arcs = Vec::new();
    for (y, &q) in dist.iter().enumerate() {
        // Zero-probability observations never happen; their posteriors are
        // undefined, so the arc is pruned rather than fabricated.
        if q <= PRUNE_EPSILON {
            continue;
        }
        let obs = &mechanism.observations()[y];
        let posterior = mechanism.belief_update(action, y, &belief)?;
        let child = grow(
            mechanism,
            posterior,
            reach_prob * q,
            cursor.child(obs),
            budget,
            node_count,
        )?;
        arcs.push(AttackArc {
            observation: obs.clone(),
            probability: q,
            child,
        });
    }
    Ok(AttackNode {
        belief,
        reach_prob,
        action: Some(cursor.action().to_string()),
        arcs,
    })
}

fn collect_leaves<'a>(node: &'a AttackNode, out: &mut Vec<&'a AttackNode>) {
    if node.arcs.is_empty() {
        out.push(node);
    }
    for arc in &node.arcs {
        collect_leaves(&arc.child, out);
    }
}

fn dot_node(
    node: &AttackNode,
    mechanism: &Mechanism,
    next_id: &mut usize,
    out: &mut String,
) -> usize {
    let id = *next_id;
    *next_id += 1;
    let label = match &node.action {
        Some(action) => escape(action),
        None => belief_label(&node.belief, mechanism),
    };
    let shape = if node.action.is_some() { "" } else { ", shape=ellipse" };
    let _ = writeln!(out, "  n{id} [label=\"{label}\"{shape}];");
    for arc in &node.arcs {
        let child_id = dot_node(&arc.child, mechanism, next_id, out);
        let _ = writeln!(
            out,
            "  n{id} -> n{child_id} [label=\"{}: {}\"];",
            escape(&arc.observation),
            fraction_or_decimal(arc.probability)
        );
    }
    id
}

/// Compact rendering of a belief for DOT labels: supported secrets with
/// their probabilities, fractions when the whole vector reconstructs
/// exactly, decimals otherwise.
pub fn belief_label(belief: &Belief, mechanism: &Mechanism) -> String {
    let support = belief.support();
    let fractions = crate::numfmt::fraction_probabilities(belief.probs());
    let parts: Vec<String> = support
        .iter()
        .map(|&x| {
            let value = match &fractions {
                Some(f) if f[x].1 == 1 => format!("{}", f[x].0),
                Some(f) => format!("{}/{}", f[x].0, f[x].1),
                None => sig12(belief.prob(x)),
            };
            format!("{}: {}", mechanism.secrets()[x], value)
        })
        .collect();
    escape(&format!("{{{}}}", parts.join(", ")))
}
