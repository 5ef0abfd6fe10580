//! Seeded random generators for beliefs, mechanisms, strategies, and
//! formulas.
//!
//! Everything here is deterministic given the seed. The crate standardizes on
//! ChaCha12 because it is reproducible across platforms and supports cheap
//! independent streams, which the simulator uses to make trial results
//! independent of scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::belief::Belief;
use crate::mechanism::{ActionFile, Mechanism, MechanismFile};
use crate::strategy::{Strategy, StrategyNode};

/// Root generator for a seed.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Generator for one stream of a seed. Streams are mutually independent, so
/// per-trial streams decouple trial randomness from execution order.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut r = ChaCha12Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform sample from the interior of the `dim`-simplex (Dirichlet with all
/// parameters 1), via normalized exponentials.
pub fn interior_belief<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Belief {
    assert!(dim >= 1, "belief dimension must be at least 1");
    let mut weights = vec![0.0; dim];
    let mut total = 0.0;
    for w in &mut weights {
        // Inverse-CDF exponential; 1 - U keeps the argument in (0, 1].
        let u: f64 = rng.gen::<f64>();
        *w = (-(1.0 - u).ln()).max(f64::MIN_POSITIVE);
        total += *w;
    }
    for w in &mut weights {
        *w /= total;
    }
    Belief::from_normalized(weights)
}

/// Random row-stochastic mechanism with the given shape. Rows are interior
/// (every entry positive), which exercises generic numeric paths.
pub fn random_mechanism<R: Rng + ?Sized>(
    rng: &mut R,
    secrets: usize,
    observations: usize,
    actions: usize,
) -> Mechanism {
    random_mechanism_with(rng, secrets, observations, actions, |rng, cols| {
        interior_belief(rng, cols).probs().to_vec()
    })
}

/// Random mechanism whose rows are all point masses, so every action is a
/// deterministic function of the secret.
pub fn random_deterministic_mechanism<R: Rng + ?Sized>(
    rng: &mut R,
    secrets: usize,
    observations: usize,
    actions: usize,
) -> Mechanism {
    random_mechanism_with(rng, secrets, observations, actions, |rng, cols| {
        let mut row = vec![0.0; cols];
        row[rng.gen_range(0..cols)] = 1.0;
        row
    })
}

fn random_mechanism_with<R: Rng + ?Sized>(
    rng: &mut R,
    secrets: usize,
    observations: usize,
    actions: usize,
    mut row: impl FnMut(&mut R, usize) -> Vec<f64>,
) -> Mechanism {
    assert!(secrets >= 1 && observations >= 1 && actions >= 1);
    let file = MechanismFile {
        secrets: (0..secrets).map(|i| format!("x{i}")).collect(),
        observations: (0..observations).map(|i| format!("y{i}")).collect(),
        actions: (0..actions)
            .map(|a| ActionFile {
                name: format!("a{a}"),
                matrix: (0..secrets).map(|_| row(rng, observations)).collect(),
            })
            .collect(),
        prior: None,
        secret_values: None,
    };
    Mechanism::from_file(file).expect("generated mechanism is valid by construction")
}

/// Random strategy tree for `mechanism`, with `depth` levels of lookahead and
/// each child expanded with probability `branch_prob`.
pub fn random_strategy<R: Rng + ?Sized>(
    rng: &mut R,
    mechanism: &Mechanism,
    depth: usize,
    branch_prob: f64,
) -> Strategy {
    fn node<R: Rng + ?Sized>(
        rng: &mut R,
        mechanism: &Mechanism,
        depth: usize,
        branch_prob: f64,
    ) -> StrategyNode {
        let action = mechanism.action_names()[rng.gen_range(0..mechanism.action_count())].clone();
        let mut children = std::collections::BTreeMap::new();
        if depth > 0 {
            for obs in mechanism.observations() {
                if rng.gen::<f64>() < branch_prob {
                    children.insert(obs.clone(), node(rng, mechanism, depth - 1, branch_prob));
                }
            }
        }
        StrategyNode { action, children }
    }
    Strategy::Tree(node(rng, mechanism, depth, branch_prob))
}

/// Random non-adaptive strategy of the given length.
pub fn random_action_list<R: Rng + ?Sized>(
    rng: &mut R,
    mechanism: &Mechanism,
    length: usize,
) -> Strategy {
    assert!(length >= 1);
    let names = mechanism.action_names();
    Strategy::NonAdaptive(
        (0..length)
            .map(|_| names[rng.gen_range(0..names.len())].clone())
            .collect(),
    )
}

/// Random boolean formula text over `vars` variables with nesting depth at
/// most `depth`. Always references at least variable `z1` when `vars >= 1`.
pub fn random_formula_text<R: Rng + ?Sized>(rng: &mut R, vars: usize, depth: usize) -> String {
    fn go<R: Rng + ?Sized>(rng: &mut R, vars: usize, depth: usize, out: &mut String) {
        if depth == 0 || rng.gen::<f64>() < 0.3 {
            if vars == 0 {
                out.push_str(if rng.gen() { "true" } else { "false" });
            } else {
                out.push_str(&format!("z{}", rng.gen_range(1..=vars)));
            }
            return;
        }
        match rng.gen_range(0..3) {
            0 => {
                out.push_str("!(");
                go(rng, vars, depth - 1, out);
                out.push(')');
            }
            op => {
                out.push('(');
                go(rng, vars, depth - 1, out);
                out.push_str(if op == 1 { " & " } else { " | " });
                go(rng, vars, depth - 1, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(rng, vars, depth, &mut out);
    out
}
