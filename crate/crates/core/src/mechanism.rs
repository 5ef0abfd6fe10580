//! Interactive mechanisms: a family of channels indexed by query actions.
//!
//! A mechanism fixes a finite secret set, a shared observation alphabet, and
//! for every action a row-stochastic matrix giving the probability of each
//! observation conditioned on each secret. An adversary interacts by choosing
//! actions, seeing observations, and updating a belief over the secrets by
//! Bayes' rule; everything else in the crate is built on these three
//! primitives.
//!
//! Construction goes through [`MechanismFile`], the serialized form, and is
//! validating: [`Mechanism::from_file`] either returns a mechanism whose
//! matrices are checked row-stochastic or an error listing every violation.
//!
//! ```
//! use qif_core::{Belief, Mechanism};
//!
//! let m: Mechanism = serde_json::from_value(serde_json::json!({
//!     "secrets": ["x0", "x1"],
//!     "observations": ["heads", "tails"],
//!     "actions": [
//!         {"name": "flip", "matrix": [[0.9, 0.1], [0.4, 0.6]]}
//!     ]
//! })).unwrap();
//! let flip = m.action_index("flip").unwrap();
//! let heads = m.observation_index("heads").unwrap();
//! let posterior = m.belief_update(flip, heads, &Belief::uniform(2)).unwrap();
//! assert!((posterior.prob(0) - 9.0 / 13.0).abs() < 1e-12);
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::error::{QifError, Result, ValidationIssue};
use crate::{DEFAULT_TOLERANCE, PRUNE_EPSILON};

// --------------------------------------------------------------------------
// Serialized form
// --------------------------------------------------------------------------

/// One action's conditional distribution table in serialized form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionFile {
    /// Action label, unique within the mechanism.
    pub name: String,
    /// `matrix[x][y]` is the probability of observation `y` given secret `x`.
    pub matrix: Vec<Vec<f64>>,
}

/// The serialized form of a mechanism, as stored in JSON files.
///
/// `prior` and `secret_values` are optional: analyses default to the uniform
/// prior, and secret values are only needed by the variance measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismFile {
    pub secrets: Vec<String>,
    pub observations: Vec<String>,
    pub actions: Vec<ActionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret_values: Option<Vec<f64>>,
}

/// Check a serialized mechanism and report every violation found.
///
/// An empty report means [`Mechanism::from_file`] will accept the input.
pub fn validate(file: &MechanismFile) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();

    for (field, labels) in [("secrets", &file.secrets), ("observations", &file.observations)] {
        if labels.is_empty() {
            issues.push(ValidationIssue::EmptySpace { field });
        }
        duplicates(field, labels.iter(), &mut issues);
    }
    if file.actions.is_empty() {
        issues.push(ValidationIssue::EmptySpace { field: "actions" });
    }
    duplicates("action", file.actions.iter().map(|a| &a.name), &mut issues);

    let rows = file.secrets.len();
    let cols = file.observations.len();
    for action in &file.actions {
        let shape_ok = action.matrix.len() == rows
            && action.matrix.iter().all(|row| row.len() == cols);
        if !shape_ok {
            let bad_cols = action
                .matrix
                .iter()
                .map(Vec::len)
                .find(|&len| len != cols)
                .unwrap_or(cols);
            issues.push(ValidationIssue::ShapeMismatch {
                action: action.name.clone(),
                expected_rows: rows,
                expected_cols: cols,
                rows: action.matrix.len(),
                cols: bad_cols,
            });
            continue;
        }
        for (x, row) in action.matrix.iter().enumerate() {
            let mut row_ok = true;
            for (y, &p) in row.iter().enumerate() {
                if !p.is_finite() || !(-DEFAULT_TOLERANCE..=1.0 + DEFAULT_TOLERANCE).contains(&p) {
                    issues.push(ValidationIssue::BadEntry {
                        action: action.name.clone(),
                        row: x,
                        col: y,
                        value: p,
                    });
                    row_ok = false;
                }
            }
            if row_ok {
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > DEFAULT_TOLERANCE {
                    issues.push(ValidationIssue::NonStochasticRow {
                        action: action.name.clone(),
                        row: x,
                        sum,
                    });
                }
            }
        }
    }

    if let Some(prior) = &file.prior {
        if prior.len() != rows {
            issues.push(ValidationIssue::BadPrior {
                detail: format!("{} entries for {} secrets", prior.len(), rows),
            });
        } else if let Err(e) = Belief::new(prior.clone()) {
            issues.push(ValidationIssue::BadPrior {
                detail: e.to_string(),
            });
        }
    }

    if let Some(values) = &file.secret_values {
        if values.len() != rows {
            issues.push(ValidationIssue::SecretValuesArity {
                expected: rows,
                got: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                issues.push(ValidationIssue::BadSecretValue { index: i, value: v });
            }
        }
    }

    issues
}

fn duplicates<'a>(
    field: &'static str,
    labels: impl Iterator<Item = &'a String>,
    issues: &mut Vec<ValidationIssue>,
) {
    let mut seen = HashMap::new();
    for label in labels {
        if seen.insert(label.clone(), ()).is_some() {
            issues.push(ValidationIssue::DuplicateLabel {
                field,
                label: label.clone(),
            });
        }
    }
}

// --------------------------------------------------------------------------
// Validated mechanism
// --------------------------------------------------------------------------

/// A validated interactive mechanism.
///
/// Indices are the primary handles for secrets, observations, and actions;
/// resolve labels once with [`Mechanism::action_index`] and
/// [`Mechanism::observation_index`]. Serialization round-trips through
/// [`MechanismFile`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "MechanismFile", into = "MechanismFile")]
pub struct Mechanism {
    secrets: Vec<String>,
    observations: Vec<String>,
    action_names: Vec<String>,
    /// Row-major `secret_count x observation_count` matrix per action.
    matrices: Vec<Vec<f64>>,
    default_prior: Option<Belief>,
    secret_values: Option<Vec<f64>>,
    observation_ids: HashMap<String, usize>,
    action_ids: HashMap<String, usize>,
    secret_ids: HashMap<String, usize>,
}

impl Mechanism {
    /// Validate a serialized mechanism and build the indexed form.
    pub fn from_file(file: MechanismFile) -> Result<Self> {
        let issues = validate(&file);
        if !issues.is_empty() {
            return Err(QifError::InvalidMechanism(issues));
        }
        let cols = file.observations.len();
        let matrices = file
            .actions
            .iter()
            .map(|a| {
                let mut flat = Vec::with_capacity(a.matrix.len() * cols);
                for row in &a.matrix {
                    // Validation admits float dust in [-tol, 0); clamp it so
                    // downstream probabilities are genuinely nonnegative.
                    flat.extend(row.iter().map(|&p| p.max(0.0)));
                }
                flat
            })
            .collect();
        Ok(Self {
            observation_ids: index_map(&file.observations),
            action_ids: index_map_by(file.actions.iter().map(|a| &a.name)),
            secret_ids: index_map(&file.secrets),
            action_names: file.actions.into_iter().map(|a| a.name).collect(),
            matrices,
            default_prior: file.prior.map(Belief::from_normalized),
            secret_values: file.secret_values,
            secrets: file.secrets,
            observations: file.observations,
        })
    }

    /// Serialized form of this mechanism.
    pub fn to_file(&self) -> MechanismFile {
        let cols = self.observations.len();
        MechanismFile {
            secrets: self.secrets.clone(),
            observations: self.observations.clone(),
            actions: self
                .action_names
                .iter()
                .zip(&self.matrices)
                .map(|(name, flat)| ActionFile {
                    name: name.clone(),
                    matrix: flat.chunks(cols).map(<[f64]>::to_vec).collect(),
                })
                .collect(),
            prior: self.default_prior.as_ref().map(|b| b.probs().to_vec()),
            secret_values: self.secret_values.clone(),
        }
    }

    pub fn secret_count(&self) -> usize {
        self.secrets.len()
    }

    pub fn observation_count(&self) -> usize {
        self.observations.len()
    }

    pub fn action_count(&self) -> usize {
        self.action_names.len()
    }

    pub fn secrets(&self) -> &[String] {
        &self.secrets
    }

    pub fn observations(&self) -> &[String] {
        &self.observations
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    /// Resolve an action label to its index.
    pub fn action_index(&self, name: &str) -> Result<usize> {
        self.action_ids
            .get(name)
            .copied()
            .ok_or_else(|| QifError::UnknownAction(name.to_string()))
    }

    /// Resolve an observation label to its index.
    pub fn observation_index(&self, name: &str) -> Result<usize> {
        self.observation_ids
            .get(name)
            .copied()
            .ok_or_else(|| QifError::UnknownObservation(name.to_string()))
    }

    /// Resolve a secret label to its index, if present.
    pub fn secret_index(&self, name: &str) -> Option<usize> {
        self.secret_ids.get(name).copied()
    }

    /// Probability of observation `obs` under action `action` given secret
    /// `secret`. Indices must be in range.
    pub fn prob(&self, action: usize, secret: usize, obs: usize) -> f64 {
        self.matrices[action][secret * self.observations.len() + obs]
    }

    /// The conditional distribution row for one secret under one action.
    pub fn row(&self, action: usize, secret: usize) -> &[f64] {
        let cols = self.observations.len();
        &self.matrices[action][secret * cols..(secret + 1) * cols]
    }

    /// Prior stored in the mechanism file, if any.
    pub fn default_prior(&self) -> Option<&Belief> {
        self.default_prior.as_ref()
    }

    /// Stored prior, or uniform when the file declared none.
    pub fn prior_or_uniform(&self) -> Belief {
        self.default_prior
            .clone()
            .unwrap_or_else(|| Belief::uniform(self.secrets.len()))
    }

    /// Numeric secret values, when declared.
    pub fn secret_values(&self) -> Option<&[f64]> {
        self.secret_values.as_deref()
    }

    /// True when every matrix entry is 0 or 1 within the default tolerance,
    /// i.e. each action computes a function of the secret.
    pub fn is_deterministic(&self) -> bool {
        self.matrices.iter().flatten().all(|&p| {
            p.abs() <= DEFAULT_TOLERANCE || (p - 1.0).abs() <= DEFAULT_TOLERANCE
        })
    }

    /// Distribution over observations induced by playing `action` under
    /// `belief`: `q(y) = sum_x belief(x) p_action(y | x)`.
    pub fn observation_dist(&self, action: usize, belief: &Belief) -> Result<Vec<f64>> {
        self.check_belief(belief)?;
        let cols = self.observations.len();
        let mut dist = vec![0.0; cols];
        for (x, &px) in belief.probs().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (y, q) in dist.iter_mut().enumerate() {
                *q += px * self.matrices[action][x * cols + y];
            }
        }
        Ok(dist)
    }

    /// Bayes update of `belief` after playing `action` and seeing `obs`:
    /// posterior(x) proportional to `belief(x) p_action(obs | x)`.
    ///
    /// Fails when the observation has (numerically) zero probability, since
    /// the posterior would be undefined.
    pub fn belief_update(&self, action: usize, obs: usize, belief: &Belief) -> Result<Belief> {
        self.check_belief(belief)?;
        let cols = self.observations.len();
        let mut posterior: Vec<f64> = belief
            .probs()
            .iter()
            .enumerate()
            .map(|(x, &px)| px * self.matrices[action][x * cols + obs])
            .collect();
        let mass: f64 = posterior.iter().sum();
        if mass <= PRUNE_EPSILON {
            return Err(QifError::ZeroProbabilityObservation {
                action: self.action_names[action].clone(),
                observation: self.observations[obs].clone(),
            });
        }
        for p in &mut posterior {
            *p /= mass;
        }
        Ok(Belief::from_normalized(posterior))
    }

    fn check_belief(&self, belief: &Belief) -> Result<()> {
        if belief.len() != self.secrets.len() {
            return Err(QifError::DimensionMismatch {
                expected: self.secrets.len(),
                got: belief.len(),
            });
        }
        Ok(())
    }

    /// Partition of the secrets into indistinguishability classes: two
    /// secrets fall in one class when every action gives them identical
    /// observation rows (entries compared at the default tolerance).
    ///
    /// No sequence of queries can move belief mass between secrets in one
    /// class, so this partition caps what any strategy can learn.
    pub fn indistinguishability(&self) -> Partition {
        let all: Vec<usize> = (0..self.action_names.len()).collect();
        self.indistinguishability_for(&all)
    }

    /// Indistinguishability classes when only the given actions may be used.
    pub fn indistinguishability_for(&self, actions: &[usize]) -> Partition {
        // Quantizing entries to multiples of the tolerance makes row equality
        // an exact key match, which keeps the grouping deterministic.
        let keys: Vec<Vec<i64>> = (0..self.secrets.len())
            .map(|x| {
                actions
                    .iter()
                    .flat_map(|&a| self.row(a, x).iter().map(|&p| quantize(p)))
                    .collect()
            })
            .collect();
        Partition::from_keys(&keys)
    }

    /// The mechanism in which the adversary's queries are part of the
    /// output: observations become `action:observation` pairs, and action
    /// `a` emits `(a, y)` exactly when the original emits `y` under `a`.
    ///
    /// Making the query visible reveals nothing extra about the secret, so
    /// the indistinguishability partition is unchanged; tests rely on this.
    pub fn lift_actions_observable(&self) -> Mechanism {
        let cols = self.observations.len();
        let actions = self.action_names.len();
        let lifted_cols = actions * cols;
        let observations: Vec<String> = self
            .action_names
            .iter()
            .flat_map(|a| self.observations.iter().map(move |y| format!("{a}:{y}")))
            .collect();
        let matrices: Vec<Vec<f64>> = (0..actions)
            .map(|a| {
                let mut flat = vec![0.0; self.secrets.len() * lifted_cols];
                for x in 0..self.secrets.len() {
                    for y in 0..cols {
                        flat[x * lifted_cols + a * cols + y] = self.matrices[a][x * cols + y];
                    }
                }
                flat
            })
            .collect();
        Mechanism {
            secrets: self.secrets.clone(),
            observation_ids: index_map(&observations),
            observations,
            action_names: self.action_names.clone(),
            matrices,
            default_prior: self.default_prior.clone(),
            secret_values: self.secret_values.clone(),
            action_ids: self.action_ids.clone(),
            secret_ids: self.secret_ids.clone(),
        }
    }
}

impl TryFrom<MechanismFile> for Mechanism {
    type Error = QifError;

    fn try_from(file: MechanismFile) -> Result<Self> {
        Mechanism::from_file(file)
    }
}

impl From<Mechanism> for MechanismFile {
    fn from(m: Mechanism) -> MechanismFile {
        m.to_file()
    }
}

fn index_map(labels: &[String]) -> HashMap<String, usize> {
    index_map_by(labels.iter())
}

fn index_map_by<'a>(labels: impl Iterator<Item = &'a String>) -> HashMap<String, usize> {
    labels
        .enumerate()
        .map(|(i, label)| (label.clone(), i))
        .collect()
}

fn quantize(p: f64) -> i64 {
    (p / DEFAULT_TOLERANCE).round() as i64
}

// --------------------------------------------------------------------------
// Partitions
// --------------------------------------------------------------------------

/// A partition of secret indices, classes ordered by smallest member and
/// members ascending within each class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    classes: Vec<Vec<usize>>,
    #[serde(skip)]
    class_of: Vec<usize>,
}

impl Partition {
    fn from_keys(keys: &[Vec<i64>]) -> Self {
        let mut groups: HashMap<&Vec<i64>, Vec<usize>> = HashMap::new();
        for (x, key) in keys.iter().enumerate() {
            groups.entry(key).or_default().push(x);
        }
        let mut classes: Vec<Vec<usize>> = groups.into_values().collect();
        classes.sort_by_key(|class| class[0]);
        let mut class_of = vec![0; keys.len()];
        for (c, class) in classes.iter().enumerate() {
            for &x in class {
                class_of[x] = c;
            }
        }
        Partition { classes, class_of }
    }

    /// The classes, ordered by smallest member.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    /// Number of classes.
    pub fn count(&self) -> usize {
        self.classes.len()
    }

    /// Index (into `classes`) of the class containing secret `x`.
    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    /// Smallest member of each class, in class order.
    pub fn representatives(&self) -> Vec<usize> {
        self.classes.iter().map(|class| class[0]).collect()
    }

    /// True when every class of `self` lies inside a class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.class_of.len() == coarser.class_of.len()
            && self.classes.iter().all(|class| {
                let target = coarser.class_of[class[0]];
                class.iter().all(|&x| coarser.class_of[x] == target)
            })
    }
}
