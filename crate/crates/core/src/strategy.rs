//! Adversary strategies: which action to play next, given what was observed.
//!
//! A strategy is a prefix-closed plan. The adaptive form is a tree: each node
//! names the action to play, and each child edge is labeled with an
//! observation; when an observation has no child, the attack stops there. The
//! non-adaptive form is a plain action list, played left to right regardless
//! of observations.
//!
//! Serialized forms mirror the two shapes:
//!
//! ```json
//! ["ZIP", "Age"]
//! {"action": "ZIP", "children": {"z1": {"action": "Date"}}}
//! ```
//!
//! The length of a strategy is the maximum number of queries it can issue.
//! Truncation cuts a strategy to its first `n` queries; the derivative is the
//! remaining plan after the first query and one observation. Both operations
//! interact with leakage in ways the tests pin down: truncating never gains
//! information, and the expansion of an adaptive strategy into the
//! non-adaptive strategy that plays every action it mentions, as many times
//! as its length, never loses information.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{QifError, Result};
use crate::mechanism::Mechanism;

/// One node of an adaptive strategy tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyNode {
    /// Action to play at this node.
    pub action: String,
    /// Continuations per observation; absent observation means stop.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub children: BTreeMap<String, StrategyNode>,
}

/// An attack plan: adaptive tree or non-adaptive action list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StrategyRepr", into = "StrategyRepr")]
pub enum Strategy {
    /// Fixed action sequence, played regardless of observations.
    NonAdaptive(Vec<String>),
    /// Observation-dependent plan.
    Tree(StrategyNode),
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum StrategyRepr {
    List(Vec<String>),
    Tree(StrategyNode),
}

impl TryFrom<StrategyRepr> for Strategy {
    type Error = QifError;

    fn try_from(repr: StrategyRepr) -> Result<Self> {
        match repr {
            StrategyRepr::List(actions) if actions.is_empty() => Err(QifError::Parse(
                "a strategy must issue at least one query".to_string(),
            )),
            StrategyRepr::List(actions) => Ok(Strategy::NonAdaptive(actions)),
            StrategyRepr::Tree(root) => Ok(Strategy::Tree(root)),
        }
    }
}

impl From<Strategy> for StrategyRepr {
    fn from(s: Strategy) -> StrategyRepr {
        match s {
            Strategy::NonAdaptive(actions) => StrategyRepr::List(actions),
            Strategy::Tree(root) => StrategyRepr::Tree(root),
        }
    }
}

impl Strategy {
    /// The strategy that plays every action of the mechanism once, in
    /// declaration order. On deterministic mechanisms this already extracts
    /// everything any strategy could.
    pub fn all_actions_once(mechanism: &Mechanism) -> Strategy {
        Strategy::NonAdaptive(mechanism.action_names().to_vec())
    }

    /// The strategy cycling through all actions for `rounds` full passes.
    pub fn lock_step(mechanism: &Mechanism, rounds: usize) -> Strategy {
        assert!(rounds >= 1, "lock-step needs at least one round");
        Strategy::NonAdaptive(
            mechanism
                .action_names()
                .iter()
                .cycle()
                .take(rounds * mechanism.action_count())
                .cloned()
                .collect(),
        )
    }

    /// Maximum number of queries this strategy can issue.
    pub fn length(&self) -> usize {
        match self {
            Strategy::NonAdaptive(actions) => actions.len(),
            Strategy::Tree(root) => depth(root),
        }
    }

    /// Number of plan nodes (list entries or tree nodes).
    pub fn node_count(&self) -> usize {
        match self {
            Strategy::NonAdaptive(actions) => actions.len(),
            Strategy::Tree(root) => count(root),
        }
    }

    /// Actions this strategy can ever play, in order of first appearance
    /// (pre-order walk; children in observation-label order).
    pub fn range(&self) -> Vec<String> {
        let mut seen = Vec::new();
        match self {
            Strategy::NonAdaptive(actions) => {
                for a in actions {
                    if !seen.contains(a) {
                        seen.push(a.clone());
                    }
                }
            }
            Strategy::Tree(root) => collect_range(root, &mut seen),
        }
        seen
    }

    /// The strategy cut down to its first `n` queries (`n >= 1`).
    pub fn truncate(&self, n: usize) -> Strategy {
        assert!(n >= 1, "a strategy must issue at least one query");
        match self {
            Strategy::NonAdaptive(actions) => {
                Strategy::NonAdaptive(actions[..actions.len().min(n)].to_vec())
            }
            Strategy::Tree(root) => Strategy::Tree(truncate_node(root, n)),
        }
    }

    /// The remaining plan after playing the first query and observing
    /// `obs`; `None` when the strategy stops there.
    pub fn derivative(&self, obs: &str) -> Option<Strategy> {
        match self {
            Strategy::NonAdaptive(actions) if actions.len() > 1 => {
                Some(Strategy::NonAdaptive(actions[1..].to_vec()))
            }
            Strategy::NonAdaptive(_) => None,
            Strategy::Tree(root) => root.children.get(obs).cloned().map(Strategy::Tree),
        }
    }

    /// True when the plan ignores observations: the action and the decision
    /// to continue depend only on how many queries were already made. A tree
    /// qualifies only if each level plays one action and continues (for all
    /// of `observations`) or stops uniformly.
    pub fn is_non_adaptive(&self, observations: &[String]) -> bool {
        match self {
            Strategy::NonAdaptive(_) => true,
            Strategy::Tree(root) => {
                let mut level = vec![root];
                while !level.is_empty() {
                    let action = &level[0].action;
                    let continuing = !level[0].children.is_empty();
                    for node in &level {
                        if node.action != *action {
                            return false;
                        }
                        let complete = observations
                            .iter()
                            .all(|obs| node.children.contains_key(obs));
                        match (continuing, complete, node.children.is_empty()) {
                            (true, true, _) => {}
                            (false, _, true) => {}
                            _ => return false,
                        }
                    }
                    let next: Vec<&StrategyNode> =
                        level.iter().flat_map(|n| n.children.values()).collect();
                    level = next;
                }
                true
            }
        }
    }

    /// The action list of a non-adaptive plan ([`QifError::NotNonAdaptive`]
    /// otherwise).
    pub fn action_list(&self, observations: &[String]) -> Result<Vec<String>> {
        if !self.is_non_adaptive(observations) {
            return Err(QifError::NotNonAdaptive);
        }
        Ok(match self {
            Strategy::NonAdaptive(actions) => actions.clone(),
            Strategy::Tree(root) => {
                let mut actions = Vec::new();
                let mut node = Some(root);
                while let Some(n) = node {
                    actions.push(n.action.clone());
                    node = n.children.values().next();
                }
                actions
            }
        })
    }

    /// Expand into the complete tree over `observations`: every node gets a
    /// child per observation down to the strategy's length. Exponential in
    /// the length; meant for small examples and tests.
    pub fn to_tree(&self, observations: &[String]) -> Strategy {
        match self {
            Strategy::Tree(_) => self.clone(),
            Strategy::NonAdaptive(actions) => {
                fn build(actions: &[String], observations: &[String]) -> StrategyNode {
                    let children = if actions.len() > 1 {
                        observations
                            .iter()
                            .map(|obs| (obs.clone(), build(&actions[1..], observations)))
                            .collect()
                    } else {
                        BTreeMap::new()
                    };
                    StrategyNode {
                        action: actions[0].clone(),
                        children,
                    }
                }
                assert!(!actions.is_empty());
                Strategy::Tree(build(actions, observations))
            }
        }
    }

    /// The non-adaptive strategy playing every action in this strategy's
    /// range, once per unit of length. It sees every query this strategy
    /// could make (with independent noise to spare), so by a coupling
    /// argument it leaks at least as much; the tests exercise that bound.
    pub fn expand_non_adaptive(&self) -> Strategy {
        let range = self.range();
        let length = self.length();
        let mut actions = Vec::with_capacity(range.len() * length);
        for action in range {
            for _ in 0..length {
                actions.push(action.clone());
            }
        }
        Strategy::NonAdaptive(actions)
    }

    /// Drop repeated queries of a non-adaptive plan on a deterministic
    /// mechanism, keeping first occurrences. Repeats of a deterministic
    /// query return the same value, so the reduced plan leaks the same.
    pub fn dedupe_deterministic(&self, mechanism: &Mechanism) -> Result<Strategy> {
        if !mechanism.is_deterministic() {
            return Err(QifError::NotDeterministic);
        }
        let actions = self.action_list(mechanism.observations())?;
        let mut kept: Vec<String> = Vec::new();
        for a in actions {
            if !kept.contains(&a) {
                kept.push(a);
            }
        }
        Ok(Strategy::NonAdaptive(kept))
    }

    /// Check that every action and observation label is defined by the
    /// mechanism.
    pub fn validate_against(&self, mechanism: &Mechanism) -> Result<()> {
        match self {
            Strategy::NonAdaptive(actions) => {
                for a in actions {
                    mechanism.action_index(a)?;
                }
                Ok(())
            }
            Strategy::Tree(root) => validate_node(root, mechanism),
        }
    }

    /// Entry point for walking the strategy query by query.
    pub(crate) fn cursor(&self) -> StrategyCursor<'_> {
        match self {
            Strategy::NonAdaptive(actions) => StrategyCursor::List { actions, next: 1 },
            Strategy::Tree(root) => StrategyCursor::Tree(root),
        }
    }

    /// GraphViz rendering: boxes for queries, edges labeled by observation
    /// (`*` for the any-observation edges of a non-adaptive plan).
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph strategy {\n  rankdir=TB;\n  node [shape=box];\n");
        match self {
            Strategy::NonAdaptive(actions) => {
                for (i, action) in actions.iter().enumerate() {
                    let _ = writeln!(out, "  n{i} [label=\"{}\"];", escape(action));
                    if i > 0 {
                        let _ = writeln!(out, "  n{} -> n{i} [label=\"*\"];", i - 1);
                    }
                }
            }
            Strategy::Tree(root) => {
                let mut next_id = 0;
                dot_node(root, &mut next_id, &mut out);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Read-only walker over either strategy shape.
#[derive(Clone, Copy)]
pub(crate) enum StrategyCursor<'a> {
    List { actions: &'a [String], next: usize },
    Tree(&'a StrategyNode),
}

impl<'a> StrategyCursor<'a> {
    /// Action to play at the current position.
    pub(crate) fn action(&self) -> &'a str {
        match self {
            StrategyCursor::List { actions, next } => &actions[next - 1],
            StrategyCursor::Tree(node) => &node.action,
        }
    }

    /// Advance past the current query on observation `obs`; `None` when the
    /// plan stops.
    pub(crate) fn child(&self, obs: &str) -> Option<StrategyCursor<'a>> {
        match self {
            StrategyCursor::List { actions, next } => {
                if *next < actions.len() {
                    Some(StrategyCursor::List {
                        actions,
                        next: next + 1,
                    })
                } else {
                    None
                }
            }
            StrategyCursor::Tree(node) => node.children.get(obs).map(StrategyCursor::Tree),
        }
    }
}

fn depth(node: &StrategyNode) -> usize {
    1 + node.children.values().map(depth).max().unwrap_or(0)
}

fn count(node: &StrategyNode) -> usize {
    1 + node.children.values().map(count).sum::<usize>()
}

fn collect_range(node: &StrategyNode, seen: &mut Vec<String>) {
    if !seen.contains(&node.action) {
        seen.push(node.action.clone());
    }
    for child in node.children.values() {
        collect_range(child, seen);
    }
}

fn truncate_node(node: &StrategyNode, n: usize) -> StrategyNode {
    StrategyNode {
        action: node.action.clone(),
        children: if n > 1 {
            node.children
                .iter()
                .map(|(obs, child)| (obs.clone(), truncate_node(child, n - 1)))
                .collect()
        } else {
            BTreeMap::new()
        },
    }
}

fn validate_node(node: &StrategyNode, mechanism: &Mechanism) -> Result<()> {
    mechanism.action_index(&node.action)?;
    for (obs, child) in &node.children {
        mechanism.observation_index(obs)?;
        validate_node(child, mechanism)?;
    }
    Ok(())
}

fn dot_node(node: &StrategyNode, next_id: &mut usize, out: &mut String) -> usize {
    let id = *next_id;
    *next_id += 1;
    let _ = writeln!(out, "  n{id} [label=\"{}\"];", escape(&node.action));
    for (obs, child) in &node.children {
        let child_id = dot_node(child, next_id, out);
        let _ = writeln!(out, "  n{id} -> n{child_id} [label=\"{}\"];", escape(obs));
    }
    id
}

pub(crate) fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}
