//! End-to-end acceptance checks, one test per criterion.
//!
//! Each test is a single pass/fail line in the runner output and pins its
//! tolerance next to the assertion. Expected values are closed forms
//! evaluated inline (entropy differences, exact fractions), never floats
//! copied from program output.

use qif_core::random::{
    interior_belief, random_formula_text, random_mechanism, random_strategy, rng,
};
use qif_core::{
    capacity, chain_decomposition, concavity_probe, convergence_probe, exhaustive_best, leakage,
    max_leakage, plan, scoring_rule, simulate, single_query_leakage, Belief, BooleanFormula,
    MeasureKind, Mechanism, Strategy, UncertaintyMeasure,
};

/// Tolerance for values quoted to a handful of decimals.
const QUOTED_TOL: f64 = 1e-6;
/// Tolerance for exact identities computed in floating point.
const EXACT_TOL: f64 = 1e-9;
/// Tolerance for plan values quoted to two decimals.
const PLAN_TOL: f64 = 1e-2;

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path}: {e}"))
}

fn mechanism(name: &str) -> Mechanism {
    serde_json::from_str(&fixture(name)).unwrap()
}

fn strategy(name: &str) -> Strategy {
    serde_json::from_str(&fixture(name)).unwrap()
}

fn assert_close(label: &str, got: f64, want: f64, tol: f64) {
    assert!(
        (got - want).abs() <= tol,
        "{label}: got {got}, want {want} within {tol}"
    );
}

/// Shannon leakage of the adaptive plan on the plain medical database:
/// log2(10) - (3/10) log2(3) - 2/5 bits; error leakage exactly 1/2.
#[test]
fn c01_medical_db_adaptive_plan() {
    let m = mechanism("medical-db.json");
    let s = strategy("zip-first-strategy.json");
    let prior = Belief::uniform(10);
    let want = 10f64.log2() - 0.3 * 3f64.log2() - 0.4;
    let shannon = leakage(&m, &prior, &s, &UncertaintyMeasure::Shannon).unwrap();
    assert_close("shannon leakage", shannon.leakage, want, QUOTED_TOL);
    let error = leakage(&m, &prior, &s, &UncertaintyMeasure::Error).unwrap();
    assert_close("error leakage", error.leakage, 0.5, EXACT_TOL);
    println!("criterion 01 PASS: shannon {} error {}", shannon.leakage, error.leakage);
}

/// The same plan against the noisy database: Shannon
/// log2(10) - (3/10) log2(3) - 8/15; error exactly 13/30.
#[test]
fn c02_noisy_db_adaptive_plan() {
    let m = mechanism("noisy-db.json");
    let s = strategy("zip-first-strategy.json");
    let prior = Belief::uniform(10);
    let want = 10f64.log2() - 0.3 * 3f64.log2() - 8.0 / 15.0;
    let shannon = leakage(&m, &prior, &s, &UncertaintyMeasure::Shannon).unwrap();
    assert_close("shannon leakage", shannon.leakage, want, QUOTED_TOL);
    let error = leakage(&m, &prior, &s, &UncertaintyMeasure::Error).unwrap();
    assert_close("error leakage", error.leakage, 13.0 / 30.0, EXACT_TOL);
    println!("criterion 02 PASS: shannon {} error {}", shannon.leakage, error.leakage);
}

/// Asking all three attributes non-adaptively on the plain database leaks
/// log2(10) - 2/5 bits, and that attains the mechanism's cap.
#[test]
fn c03_non_adaptive_pass_attains_the_cap() {
    let m = mechanism("medical-db.json");
    let s = Strategy::NonAdaptive(vec!["ZIP".into(), "Date".into(), "Age".into()]);
    let prior = Belief::uniform(10);
    let value = leakage(&m, &prior, &s, &UncertaintyMeasure::Shannon)
        .unwrap()
        .leakage;
    assert_close("shannon leakage", value, 10f64.log2() - 0.4, QUOTED_TOL);
    let cap = max_leakage(&m, &prior, &UncertaintyMeasure::Shannon)
        .unwrap()
        .value;
    assert_close("attains max leakage", value, cap, EXACT_TOL);
    println!("criterion 03 PASS: leakage {value} = cap {cap}");
}

/// The medical database has 8 indistinguishability classes, so its
/// capacities are exactly 3 bits (Shannon) and 0.875 (error).
#[test]
fn c04_capacities_from_class_count() {
    let m = mechanism("medical-db.json");
    assert_eq!(m.indistinguishability().count(), 8);
    let shannon = capacity(&m, MeasureKind::Shannon).unwrap();
    assert_eq!(shannon.classes, 8);
    assert_eq!(shannon.value, 3.0);
    let error = capacity(&m, MeasureKind::Error).unwrap();
    assert_eq!(error.value, 0.875);
    println!("criterion 04 PASS: K=8, shannon 3, error 0.875");
}

/// The two-query Shannon plan on the noisy database starts with Age; the
/// committed-first-action values should be about {2.11, 2.27, 2.4}.
///
/// Known red: the ZIP and Date entries of that target set are not
/// reproducible. This test first re-derives every committed-first-action
/// value through leakage-module primitives alone (first-query gain plus
/// the probability-weighted best single continuation), which agrees with
/// the planner to 1e-9 and recombines to the same attack-tree values the
/// criterion 2 regression pins. That route gives
/// ZIP = log2(10) - (3/10) log2(3) - 7/15 = 2.3798 and
/// Date = log2(10) - 7/15 - (1/5) log2(3) - (1/6) log2(5) = 2.1513,
/// while the Age entry, the root action, and the total value all match
/// their targets. The final assertions keep the original targets so the
/// discrepancy stays visible instead of being edited away.
#[test]
fn c05_two_query_plan_on_the_noisy_db() {
    let m = mechanism("noisy-db.json");
    let prior = Belief::uniform(10);
    let report = plan(&m, &prior, 2, &UncertaintyMeasure::Shannon, None).unwrap();
    assert_close("optimal value", report.value, 2.4, PLAN_TOL);
    let root = match &report.strategy {
        Strategy::Tree(node) => node.action.clone(),
        Strategy::NonAdaptive(actions) => actions[0].clone(),
    };
    assert_eq!(root, "Age");

    // Independent route: value of committing to action a first, then
    // playing the best single query, built from one-step primitives only.
    for (a, branch) in report.root_values.iter().enumerate() {
        let mut value =
            single_query_leakage(&m, &prior, a, &UncertaintyMeasure::Shannon).unwrap();
        let dist = m.observation_dist(a, &prior).unwrap();
        for (y, &q) in dist.iter().enumerate() {
            if q <= 1e-12 {
                continue;
            }
            let posterior = m.belief_update(a, y, &prior).unwrap();
            let best = (0..m.action_count())
                .map(|b| {
                    single_query_leakage(&m, &posterior, b, &UncertaintyMeasure::Shannon)
                        .unwrap()
                })
                .fold(0.0f64, f64::max);
            value += q * best;
        }
        assert_close(
            &format!("{} branch, re-derived", branch.action),
            branch.value,
            value,
            EXACT_TOL,
        );
    }

    let want = [("ZIP", 2.11), ("Age", 2.4), ("Date", 2.27)];
    assert_eq!(report.root_values.len(), want.len());
    for (branch, (name, _)) in report.root_values.iter().zip(want) {
        assert_eq!(branch.action, name);
    }
    println!(
        "criterion 05: value {}, root {root}; checking branch targets",
        report.value
    );
    for (branch, (name, value)) in report.root_values.iter().zip(want) {
        assert_close(name, branch.value, value, PLAN_TOL);
    }
    println!("criterion 05 PASS");
}

/// Backward induction matches exhaustive strategy enumeration on 50
/// seeded random mechanisms.
#[test]
fn c06_planner_agrees_with_the_exhaustive_oracle() {
    let mut r = rng(2026);
    for case in 0..50u64 {
        let x = 2 + (case as usize) % 4; // up to 5 secrets
        let y = 2 + (case as usize) % 2; // up to 3 observations
        let a = 1 + (case as usize) % 3; // up to 3 actions
        let horizon = 1 + (case as usize) % 2;
        let m = random_mechanism(&mut r, x, y, a);
        let prior = interior_belief(&mut r, x);
        let measure = if case % 2 == 0 {
            UncertaintyMeasure::Shannon
        } else {
            UncertaintyMeasure::Error
        };
        let planned = plan(&m, &prior, horizon, &measure, None).unwrap();
        let oracle = exhaustive_best(&m, &prior, horizon, &measure, None).unwrap();
        assert_close(
            &format!("case {case} ({x}x{y}, {a} actions, horizon {horizon})"),
            planned.value,
            oracle.value,
            EXACT_TOL,
        );
    }
    println!("criterion 06 PASS: 50 planner/oracle agreements");
}

/// Expanding any strategy to its non-adaptive closure never loses
/// leakage, and the closure's length is exactly |range| * length.
#[test]
fn c07_non_adaptive_expansion_dominates() {
    let mut r = rng(40);
    for case in 0..100 {
        let x = 2 + case % 4;
        let y = 2 + case % 2;
        let a = 1 + case % 3;
        let m = random_mechanism(&mut r, x, y, a);
        let prior = interior_belief(&mut r, x);
        let s = random_strategy(&mut r, &m, 1 + case % 3, 0.7);
        let expanded = s.expand_non_adaptive();
        assert_eq!(expanded.length(), s.range().len() * s.length());
        for measure in [UncertaintyMeasure::Shannon, UncertaintyMeasure::Error] {
            let original = leakage(&m, &prior, &s, &measure).unwrap().leakage;
            let closure = leakage(&m, &prior, &expanded, &measure).unwrap().leakage;
            assert!(
                closure >= original - EXACT_TOL,
                "case {case} {}: {closure} < {original}",
                measure.name()
            );
        }
    }
    println!("criterion 07 PASS: 100 expansion dominations");
}

/// First-query decomposition recombines to the direct leakage on 100
/// seeded random instances.
#[test]
fn c08_chain_rule_recombines() {
    let mut r = rng(41);
    for case in 0..100 {
        let x = 2 + case % 4;
        let y = 2 + case % 2;
        let a = 1 + case % 3;
        let m = random_mechanism(&mut r, x, y, a);
        let prior = interior_belief(&mut r, x);
        let s = random_strategy(&mut r, &m, 1 + case % 3, 0.7);
        for measure in [
            UncertaintyMeasure::Shannon,
            UncertaintyMeasure::Error,
            UncertaintyMeasure::Guessing,
        ] {
            let chain = chain_decomposition(&m, &prior, &s, &measure).unwrap();
            assert_close(
                &format!("case {case} {}", measure.name()),
                chain.recombined,
                chain.total,
                EXACT_TOL,
            );
        }
    }
    println!("criterion 08 PASS: 100 chain recombinations");
}

/// Every generated instance keeps leakage inside [0, max leakage] and
/// never loses information when allowed more queries.
#[test]
fn c09_leakage_bounds_and_truncation_monotonicity() {
    let mut r = rng(42);
    for case in 0..100 {
        let x = 2 + case % 4;
        let y = 2 + case % 2;
        let a = 1 + case % 3;
        let m = random_mechanism(&mut r, x, y, a);
        let prior = interior_belief(&mut r, x);
        let s = random_strategy(&mut r, &m, 1 + case % 3, 0.7);
        for measure in [
            UncertaintyMeasure::Shannon,
            UncertaintyMeasure::Error,
            UncertaintyMeasure::Guessing,
        ] {
            let cap = max_leakage(&m, &prior, &measure).unwrap().value;
            let mut previous = 0.0;
            for n in 1..=s.length() {
                let cut = leakage(&m, &prior, &s.truncate(n), &measure)
                    .unwrap()
                    .leakage;
                assert!(cut >= -EXACT_TOL, "case {case}: negative leakage {cut}");
                assert!(
                    cut <= cap + EXACT_TOL,
                    "case {case}: leakage {cut} above cap {cap}"
                );
                assert!(
                    cut >= previous - EXACT_TOL,
                    "case {case}: truncation dropped {previous} to {cut}"
                );
                previous = cut;
            }
        }
    }
    println!("criterion 09 PASS: 100 instances bounded and monotone");
}

/// Scoring rules are proper: honest forecasts score U(p) and never beat
/// dishonest ones; the four built-in measures pass the concavity probe.
#[test]
fn c10_proper_scoring_and_concavity() {
    let mut r = rng(43);
    for pair in 0..1000u64 {
        let dim = 2 + (pair as usize) % 4;
        let truth = interior_belief(&mut r, dim);
        let forecast = interior_belief(&mut r, dim);
        let values: Vec<f64> = (0..dim).map(|i| i as f64).collect();
        for measure in [
            UncertaintyMeasure::Shannon,
            UncertaintyMeasure::Error,
            UncertaintyMeasure::Variance {
                secret_values: values,
            },
        ] {
            let rule = scoring_rule(&measure).unwrap();
            let honest = rule.expected_score(&truth, &truth).unwrap();
            let entropy = rule.measure().eval(&truth).unwrap();
            assert_close(
                &format!("pair {pair} {} honest score", measure.name()),
                honest,
                entropy,
                EXACT_TOL,
            );
            let dishonest = rule.expected_score(&truth, &forecast).unwrap();
            assert!(
                dishonest >= honest - EXACT_TOL,
                "pair {pair} {}: dishonest {dishonest} beats honest {honest}",
                measure.name()
            );
        }
    }
    for kind in [
        MeasureKind::Shannon,
        MeasureKind::Error,
        MeasureKind::Guessing,
        MeasureKind::Variance,
    ] {
        let values: Vec<f64> = (0..4).map(|i| i as f64).collect();
        let measure = UncertaintyMeasure::from_kind(kind, Some(&values)).unwrap();
        let report = concavity_probe(&measure, 4, 2000, 7).unwrap();
        assert!(
            report.max_violation <= EXACT_TOL,
            "{kind:?} violated concavity by {}",
            report.max_violation
        );
    }
    println!("criterion 10 PASS: 1000 proper pairs, 4 concave measures");
}

/// A mechanism leaks through some single query exactly when its formula
/// is satisfiable, checked against brute force on 50 random formulas.
#[test]
fn c11_satisfiability_reduction() {
    let mut r = rng(44);
    let mut satisfiable = 0;
    for case in 0..50 {
        let vars = 1 + case % 8;
        let formula = BooleanFormula::parse(&random_formula_text(&mut r, vars, 4)).unwrap();
        let m = formula.to_mechanism().unwrap();
        let prior = Belief::uniform(2);
        let mut leaks = false;
        for action in 0..m.action_count() {
            let value =
                single_query_leakage(&m, &prior, action, &UncertaintyMeasure::Shannon).unwrap();
            if value > EXACT_TOL {
                leaks = true;
                break;
            }
        }
        let sat = formula.is_satisfiable_brute_force().unwrap();
        assert_eq!(
            leaks,
            sat,
            "case {case} ({}): leakage and satisfiability disagree",
            formula.text()
        );
        satisfiable += usize::from(sat);
    }
    assert!(satisfiable > 0, "every sampled formula was unsatisfiable");
    assert!(satisfiable < 50, "every sampled formula was satisfiable");
    println!("criterion 11 PASS: 50 formulas, {satisfiable} satisfiable");
}

/// Monte Carlo estimates of the criterion 1-2 values land within four
/// standard errors at 100k trials, and identical seeds reproduce the
/// identical report.
#[test]
fn c12_simulator_statistical_cross_check() {
    let plain = mechanism("medical-db.json");
    let noisy = mechanism("noisy-db.json");
    let s = strategy("zip-first-strategy.json");
    let prior = Belief::uniform(10);
    let scenarios = [
        (
            &plain,
            UncertaintyMeasure::Shannon,
            10f64.log2() - 0.3 * 3f64.log2() - 0.4,
        ),
        (&plain, UncertaintyMeasure::Error, 0.5),
        (
            &noisy,
            UncertaintyMeasure::Shannon,
            10f64.log2() - 0.3 * 3f64.log2() - 8.0 / 15.0,
        ),
        (&noisy, UncertaintyMeasure::Error, 13.0 / 30.0),
    ];
    for (i, (m, measure, exact)) in scenarios.iter().enumerate() {
        let report = simulate(m, &prior, &s, measure, 100_000, 90 + i as u64).unwrap();
        assert!(report.std_error > 0.0);
        assert!(
            (report.leakage_estimate - exact).abs() <= 4.0 * report.std_error,
            "scenario {i}: {} vs {exact} (se {})",
            report.leakage_estimate,
            report.std_error
        );
        let again = simulate(m, &prior, &s, measure, 100_000, 90 + i as u64).unwrap();
        assert_eq!(
            serde_json::to_vec(&report).unwrap(),
            serde_json::to_vec(&again).unwrap(),
            "scenario {i} not byte-reproducible"
        );
    }
    println!("criterion 12 PASS: 4 scenarios within 4 standard errors");
}

/// The cycling probe reaches the cap after one full pass on the plain
/// database, and approaches it monotonically on a noisy binary channel.
#[test]
fn c13_convergence_probe() {
    let plain = mechanism("medical-db.json");
    let report = convergence_probe(
        &plain,
        &Belief::uniform(10),
        &UncertaintyMeasure::Shannon,
        3,
    )
    .unwrap();
    assert_eq!(plain.action_count(), 3);
    assert_close(
        "round 3 attains the cap",
        report.rounds[2].value,
        report.max_leakage,
        EXACT_TOL,
    );
    assert_close(
        "cap value",
        report.max_leakage,
        10f64.log2() - 0.4,
        QUOTED_TOL,
    );

    let channel = mechanism("binary-channel.json");
    let noisy = convergence_probe(
        &channel,
        &Belief::uniform(2),
        &UncertaintyMeasure::Shannon,
        10,
    )
    .unwrap();
    assert_close("binary cap", noisy.max_leakage, 1.0, EXACT_TOL);
    for w in noisy.rounds.windows(2) {
        assert!(
            w[1].value >= w[0].value - EXACT_TOL,
            "sequence dropped at round {}",
            w[1].round
        );
        assert!(
            w[1].gap < w[0].gap,
            "gap stalled at round {}",
            w[1].round
        );
    }
    println!("criterion 13 PASS: cap at round 3; 10 shrinking gaps");
}
