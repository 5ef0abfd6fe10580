//! Randomized invariant checks for the analysis pipeline.
//!
//! Instances are built by the seeded generators in `qif_core::random`, so
//! proptest shrinks over the seed and dimensions while each case stays
//! reproducible. Tolerances match the library's own: 1e-9 for exact
//! identities, looser only where a bound is genuinely one-sided.

use proptest::prelude::*;

use qif_core::random::{
    interior_belief, random_action_list, random_deterministic_mechanism, random_mechanism,
    random_strategy, rng,
};
use qif_core::{
    build_attack_tree, chain_decomposition, exhaustive_best, leakage, max_leakage, plan,
    scoring_rule, simulate, Belief, Mechanism, Strategy, UncertaintyMeasure,
};

const TOL: f64 = 1e-9;

fn measures() -> Vec<UncertaintyMeasure> {
    vec![
        UncertaintyMeasure::Shannon,
        UncertaintyMeasure::Error,
        UncertaintyMeasure::Guessing,
    ]
}

/// A small random instance: mechanism, interior prior, and both strategy
/// shapes drawn against it.
fn instance(seed: u64, x: usize, y: usize, a: usize) -> (Mechanism, Belief, Strategy, Strategy) {
    let mut r = rng(seed);
    let mech = random_mechanism(&mut r, x, y, a);
    let prior = interior_belief(&mut r, x);
    let tree = random_strategy(&mut r, &mech, 3, 0.7);
    let list = random_action_list(&mut r, &mech, 3);
    (mech, prior, tree, list)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Mixing two beliefs never drops a built-in measure below the mix of
    /// its endpoints, so extra information can never hurt the adversary.
    #[test]
    fn builtin_measures_are_concave(seed in 0u64..1 << 48, dim in 2usize..6, lambda in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let p = interior_belief(&mut r, dim);
        let q = interior_belief(&mut r, dim);
        let mix = p.mix(&q, lambda);
        let values: Vec<f64> = (0..dim).map(|i| i as f64).collect();
        for measure in [
            UncertaintyMeasure::Shannon,
            UncertaintyMeasure::Error,
            UncertaintyMeasure::Guessing,
            UncertaintyMeasure::Variance { secret_values: values },
        ] {
            let mixed = measure.eval(&mix).unwrap();
            let split = lambda * measure.eval(&p).unwrap()
                + (1.0 - lambda) * measure.eval(&q).unwrap();
            prop_assert!(
                mixed >= split - TOL,
                "{}: U(mix) = {mixed} < {split}",
                measure.name()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    /// Every strategy's leakage sits between zero and the cap set by the
    /// indistinguishability partition.
    #[test]
    fn leakage_is_bounded(seed in 0u64..1 << 48, x in 2usize..6, y in 2usize..4, a in 1usize..4) {
        let (mech, prior, tree, list) = instance(seed, x, y, a);
        for measure in measures() {
            let cap = max_leakage(&mech, &prior, &measure).unwrap().value;
            prop_assert!(cap >= -TOL);
            for strategy in [&tree, &list] {
                let value = leakage(&mech, &prior, strategy, &measure).unwrap().leakage;
                prop_assert!(value >= -TOL, "{}: leakage {value} < 0", measure.name());
                prop_assert!(
                    value <= cap + TOL,
                    "{}: leakage {value} above cap {cap}",
                    measure.name()
                );
            }
        }
    }

    /// Allowing more queries of the same plan never loses information.
    #[test]
    fn truncation_is_monotone(seed in 0u64..1 << 48, x in 2usize..6, y in 2usize..4, a in 1usize..4) {
        let (mech, prior, tree, list) = instance(seed, x, y, a);
        for measure in measures() {
            for strategy in [&tree, &list] {
                let mut previous = 0.0;
                for n in 1..=strategy.length() {
                    let value = leakage(&mech, &prior, &strategy.truncate(n), &measure)
                        .unwrap()
                        .leakage;
                    prop_assert!(
                        value >= previous - TOL,
                        "{}: leakage dropped from {previous} to {value} at cut {n}",
                        measure.name()
                    );
                    previous = value;
                }
            }
        }
    }

    /// The non-adaptive expansion plays every action the original could,
    /// so it leaks at least as much, with exactly |range| * length queries.
    #[test]
    fn expansion_dominates(seed in 0u64..1 << 48, x in 2usize..6, y in 2usize..3, a in 1usize..4) {
        let (mech, prior, tree, _) = instance(seed, x, y, a);
        let expanded = tree.expand_non_adaptive();
        prop_assert!(expanded.is_non_adaptive(mech.observations()));
        prop_assert_eq!(expanded.length(), tree.range().len() * tree.length());
        for measure in measures() {
            let original = leakage(&mech, &prior, &tree, &measure).unwrap().leakage;
            let bigger = leakage(&mech, &prior, &expanded, &measure).unwrap().leakage;
            prop_assert!(
                bigger >= original - TOL,
                "{}: expansion leaked {bigger} < {original}",
                measure.name()
            );
        }
    }

    /// Splitting leakage into the first query plus weighted remainders
    /// recombines to the direct value.
    #[test]
    fn chain_rule_recombines(seed in 0u64..1 << 48, x in 2usize..6, y in 2usize..4, a in 1usize..4) {
        let (mech, prior, tree, list) = instance(seed, x, y, a);
        for measure in measures() {
            for strategy in [&tree, &list] {
                let chain = chain_decomposition(&mech, &prior, strategy, &measure).unwrap();
                prop_assert!(
                    (chain.recombined - chain.total).abs() <= TOL,
                    "{}: recombined {} vs direct {}",
                    measure.name(),
                    chain.recombined,
                    chain.total
                );
            }
        }
    }

    /// Arc probabilities out of every attack tree node form a distribution,
    /// and leaf reach probabilities sum to one.
    #[test]
    fn attack_trees_conserve_probability(seed in 0u64..1 << 48, x in 2usize..6, y in 2usize..4, a in 1usize..4) {
        let (mech, prior, tree, _) = instance(seed, x, y, a);
        let attack = build_attack_tree(&mech, &prior, &tree, None).unwrap();
        let reach: f64 = attack.leaves().iter().map(|leaf| leaf.reach_prob).sum();
        prop_assert!((reach - 1.0).abs() <= TOL, "leaf reach sums to {reach}");
        let mut stack = vec![&attack.root];
        while let Some(node) = stack.pop() {
            if node.arcs.is_empty() {
                continue;
            }
            let total: f64 = node.arcs.iter().map(|arc| arc.probability).sum();
            prop_assert!((total - 1.0).abs() <= TOL, "arcs sum to {total}");
            for arc in &node.arcs {
                stack.push(&arc.child);
            }
        }
    }

    /// Mechanism and strategy serialization round-trips to the same JSON.
    #[test]
    fn json_round_trips(seed in 0u64..1 << 48, x in 2usize..6, y in 2usize..4, a in 1usize..4) {
        let (mech, _, tree, list) = instance(seed, x, y, a);
        let file = serde_json::to_value(mech.to_file()).unwrap();
        let reparsed: Mechanism = serde_json::from_value(file.clone()).unwrap();
        prop_assert_eq!(file, serde_json::to_value(reparsed.to_file()).unwrap());
        for strategy in [&tree, &list] {
            let json = serde_json::to_value(strategy).unwrap();
            let back: Strategy = serde_json::from_value(json.clone()).unwrap();
            prop_assert_eq!(json, serde_json::to_value(&back).unwrap());
        }
    }

    /// Making actions part of the observation never merges secrets that
    /// were distinguishable, and never splits indistinguishable ones.
    #[test]
    fn lifting_preserves_the_partition(seed in 0u64..1 << 48, x in 2usize..6, y in 2usize..4, a in 1usize..4) {
        let mut r = rng(seed);
        let mech = random_mechanism(&mut r, x, y, a);
        let lifted = mech.lift_actions_observable();
        let direct = mech.indistinguishability();
        let observed = lifted.indistinguishability();
        prop_assert_eq!(direct.classes(), observed.classes());
    }

    /// Playing more actions can only refine who is distinguishable.
    #[test]
    fn more_actions_refine_the_partition(seed in 0u64..1 << 48, x in 2usize..6, y in 2usize..4, a in 2usize..4) {
        let mut r = rng(seed);
        let mech = random_mechanism(&mut r, x, y, a);
        let all: Vec<usize> = (0..mech.action_count()).collect();
        for k in 1..=all.len() {
            let some = mech.indistinguishability_for(&all[..k]);
            let full = mech.indistinguishability_for(&all);
            prop_assert!(full.refines(&some), "subset partition not coarser");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Backward induction agrees with brute-force strategy enumeration,
    /// and its reported value is the real leakage of the plan it returns.
    #[test]
    fn planner_matches_oracle_and_its_own_plan(seed in 0u64..1 << 48, x in 2usize..5, y in 2usize..3, a in 1usize..3, horizon in 1usize..3) {
        let mut r = rng(seed);
        let mech = random_mechanism(&mut r, x, y, a);
        let prior = interior_belief(&mut r, x);
        for measure in [UncertaintyMeasure::Shannon, UncertaintyMeasure::Error] {
            let planned = plan(&mech, &prior, horizon, &measure, None).unwrap();
            prop_assert!(planned.strategy.length() <= horizon);
            prop_assert!(planned.nodes_expanded as u128 <= planned.estimated_nodes);
            let recomputed = leakage(&mech, &prior, &planned.strategy, &measure)
                .unwrap()
                .leakage;
            prop_assert!(
                (planned.value - recomputed).abs() <= TOL,
                "{}: planner said {} but its strategy leaks {recomputed}",
                measure.name(),
                planned.value
            );
            let oracle = exhaustive_best(&mech, &prior, horizon, &measure, None).unwrap();
            prop_assert!(
                (planned.value - oracle.value).abs() <= TOL,
                "{}: planner {} vs oracle {}",
                measure.name(),
                planned.value,
                oracle.value
            );
        }
    }

    /// On deterministic mechanisms, dropping repeated queries of a
    /// non-adaptive plan changes nothing.
    #[test]
    fn dedupe_preserves_deterministic_leakage(seed in 0u64..1 << 48, x in 2usize..6, y in 2usize..4, a in 1usize..4) {
        let mut r = rng(seed);
        let mech = random_deterministic_mechanism(&mut r, x, y, a);
        let prior = interior_belief(&mut r, x);
        let list = random_action_list(&mut r, &mech, 4);
        let deduped = list.dedupe_deterministic(&mech).unwrap();
        prop_assert!(deduped.length() <= list.length());
        for measure in measures() {
            let full = leakage(&mech, &prior, &list, &measure).unwrap().leakage;
            let cut = leakage(&mech, &prior, &deduped, &measure).unwrap().leakage;
            prop_assert!(
                (full - cut).abs() <= TOL,
                "{}: dedupe moved leakage {full} to {cut}",
                measure.name()
            );
        }
    }

    /// Forecasting honestly minimizes the expected score, and the minimum
    /// is the measure itself.
    #[test]
    fn scoring_rules_are_proper(seed in 0u64..1 << 48, dim in 2usize..6) {
        let mut r = rng(seed);
        let truth = interior_belief(&mut r, dim);
        let forecast = interior_belief(&mut r, dim);
        let values: Vec<f64> = (0..dim).map(|i| (i * i) as f64).collect();
        for measure in [
            UncertaintyMeasure::Shannon,
            UncertaintyMeasure::Error,
            UncertaintyMeasure::Variance { secret_values: values },
        ] {
            let rule = scoring_rule(&measure).unwrap();
            let honest = rule.expected_score(&truth, &truth).unwrap();
            let dishonest = rule.expected_score(&truth, &forecast).unwrap();
            let entropy = rule.measure().eval(&truth).unwrap();
            prop_assert!((honest - entropy).abs() <= TOL);
            prop_assert!(dishonest >= honest - TOL);
        }
    }

    /// Identical simulation configs give identical reports.
    #[test]
    fn simulation_is_reproducible(seed in 0u64..1 << 48, x in 2usize..5, y in 2usize..3, a in 1usize..3) {
        let (mech, prior, tree, _) = instance(seed, x, y, a);
        let first = simulate(&mech, &prior, &tree, &UncertaintyMeasure::Shannon, 64, seed).unwrap();
        let second = simulate(&mech, &prior, &tree, &UncertaintyMeasure::Shannon, 64, seed).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&first).unwrap(),
            serde_json::to_string(&second).unwrap()
        );
    }
}
