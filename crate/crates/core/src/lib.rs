//! Quantitative information flow for interactive mechanisms.
//!
//! This crate measures what an adaptive adversary learns about a secret by
//! querying a system that answers through noisy channels. The model:
//!
//! - a [`Mechanism`] fixes a finite secret set and, per query action, a
//!   row-stochastic matrix from secrets to observations;
//! - a [`Belief`] is the adversary's distribution over secrets, updated by
//!   Bayes' rule after each observation;
//! - an [`UncertaintyMeasure`] (Shannon, Bayes error, guessing effort,
//!   variance, or custom) turns beliefs into scalars, and must be concave so
//!   that information never hurts;
//! - a [`Strategy`] decides which action to play next given past
//!   observations; running one unfolds into an [`attack::AttackTree`] whose
//!   leaf beliefs determine the strategy's [`leakage`].
//!
//! On top of those primitives sit the analyses: exact leakage and its chain
//! rule decomposition, the indistinguishability partition and the leakage
//! caps it induces ([`max_leakage`], [`capacity`]), an optimal attack
//! [`plan`]ner by backward induction with an exhaustive oracle to check it,
//! proper scoring rules derived from measures ([`scoring_rule`]), seeded
//! Monte Carlo [`simulate`]ion, CSV table [`ingest_csv`], and a reduction
//! from boolean satisfiability ([`BooleanFormula`]) showing that deciding
//! "does this mechanism leak at all?" is NP-hard.
//!
//! ```
//! use qif_core::{plan, Belief, Mechanism, Strategy, UncertaintyMeasure};
//!
//! let m: Mechanism = serde_json::from_value(serde_json::json!({
//!     "secrets": ["a", "b", "c", "d"],
//!     "observations": ["0", "1"],
//!     "actions": [
//!         {"name": "low",  "matrix": [[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]]},
//!         {"name": "high", "matrix": [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]}
//!     ]
//! })).unwrap();
//!
//! // Two queries pin down the secret exactly: 2 bits of leakage.
//! let best = plan(&m, &Belief::uniform(4), 2, &UncertaintyMeasure::Shannon, None).unwrap();
//! assert!((best.value - 2.0).abs() < 1e-12);
//! match best.strategy {
//!     Strategy::Tree(ref root) => assert_eq!(root.action, "low"),
//!     _ => unreachable!(),
//! }
//! ```

#![forbid(unsafe_code)]

pub mod attack;
pub mod belief;
pub mod boolean;
pub mod error;
pub mod ingest;
pub mod leakage;
pub mod measure;
pub mod mechanism;
pub mod numfmt;
pub mod planner;
pub mod random;
pub mod scoring;
pub mod sim;
pub mod strategy;

pub use attack::{build_attack_tree, AttackArc, AttackNode, AttackTree};
pub use belief::Belief;
pub use boolean::BooleanFormula;
pub use error::{QifError, Result, ValidationIssue};
pub use ingest::{ingest_csv, NoiseSpec};
pub use leakage::{
    capacity, capacity_search, chain_decomposition, leakage, max_leakage, single_query_leakage,
    CapacityReport, CapacitySearchReport, ChainBranch, ChainDecomposition, LeakageReport,
    MaxLeakageReport,
};
pub use measure::{concavity_probe, ConcavityReport, MeasureKind, UncertaintyMeasure};
pub use mechanism::{validate, ActionFile, Mechanism, MechanismFile, Partition};
pub use planner::{
    exhaustive_best, mdp_size_estimate, plan, size_estimate, OracleReport, PlanReport,
    SizeEstimate,
};
pub use scoring::{scoring_rule, ScoringRule};
pub use sim::{
    convergence_probe, sample_trace, simulate, ConvergenceReport, SimulationReport, Trace,
};
pub use strategy::{Strategy, StrategyNode};

/// Absolute tolerance for validating probabilities and comparing rows.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Observation probabilities at or below this are treated as zero: the
/// branch cannot occur and its posterior is undefined.
pub const PRUNE_EPSILON: f64 = 1e-12;
