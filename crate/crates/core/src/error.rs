//! Error and validation-report types shared across the crate.

use std::fmt;

use thiserror::Error;

/// Everything that can go wrong when building or analyzing a mechanism.
#[derive(Debug, Clone, Error)]
#[non_exhaustive]
pub enum QifError {
    /// A probability vector failed validation (negative entry, bad sum, empty).
    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    /// A mechanism failed validation. Every violation is listed, not just the first.
    #[error("invalid mechanism: {}", format_issues(.0))]
    InvalidMechanism(Vec<ValidationIssue>),

    /// An action label that the mechanism does not define.
    #[error("unknown action `{0}`")]
    UnknownAction(String),

    /// An observation label that the mechanism does not define.
    #[error("unknown observation `{0}`")]
    UnknownObservation(String),

    /// Bayes update conditioned on an observation of (numerically) zero probability.
    #[error("observation `{observation}` has zero probability under action `{action}`")]
    ZeroProbabilityObservation { action: String, observation: String },

    /// The variance measure needs a numeric value per secret and none was provided.
    #[error("the variance measure requires numeric secret values")]
    MissingSecretValues,

    /// A scoring rule was requested for a measure with no known subgradient.
    #[error("measure `{0}` has no subgradient; provide one to build a scoring rule")]
    NoSubgradient(String),

    /// Scores were requested at a forecast on the simplex boundary.
    #[error("forecast has a zero entry; scores are only defined for interior forecasts")]
    BoundaryForecast,

    /// Vector lengths that were required to agree did not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Malformed input: JSON, CSV, formula text, or a belief literal.
    #[error("parse error: {0}")]
    Parse(String),

    /// A boolean formula mentions more variables than the build guard allows.
    #[error("formula uses {got} variables, above the limit of {limit}")]
    TooManyVariables { got: usize, limit: usize },

    /// The secret column of an ingested table repeats a value.
    #[error("duplicate secret id `{0}` in secret column")]
    DuplicateSecretIds(String),

    /// A noise radius was requested on a column with a non-integer cell.
    #[error("noise column `{column}` has non-numeric cell `{cell}`")]
    NonNumericNoiseColumn { column: String, cell: String },

    /// A named CSV column is absent from the header.
    #[error("column `{0}` not found in table header")]
    MissingColumn(String),

    /// An operation that requires a deterministic mechanism got a noisy one.
    #[error("mechanism is not deterministic")]
    NotDeterministic,

    /// An operation that requires a non-adaptive strategy got an adaptive one.
    #[error("strategy is not non-adaptive")]
    NotNonAdaptive,

    /// Estimated work exceeds the configured budget.
    #[error("estimated cost {estimate} exceeds budget {budget}")]
    BudgetExceeded { estimate: u128, budget: u128 },

    /// Exhaustive enumeration would visit too many strategies.
    #[error("{count} candidate strategies exceed the enumeration limit {limit}")]
    TooManyStrategies { count: u128, limit: u128 },

    /// No closed-form capacity is known for this measure.
    #[error("no closed-form capacity for measure `{0}`")]
    UnsupportedMeasure(String),
}

/// One finding from mechanism validation.
///
/// Validation is report-style: it walks the whole mechanism and returns every
/// violation it sees so a malformed file can be fixed in one pass.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum ValidationIssue {
    /// `secrets`, `observations`, or `actions` is empty.
    EmptySpace { field: &'static str },
    /// The same label occurs twice in one alphabet.
    DuplicateLabel { field: &'static str, label: String },
    /// An action matrix has the wrong number of rows or columns.
    ShapeMismatch {
        action: String,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    /// A matrix entry is negative or not finite.
    BadEntry {
        action: String,
        row: usize,
        col: usize,
        value: f64,
    },
    /// A matrix row does not sum to 1 within tolerance.
    NonStochasticRow { action: String, row: usize, sum: f64 },
    /// The prior is not a valid distribution over the secrets.
    BadPrior { detail: String },
    /// `secret_values` is present but its length differs from `secrets`.
    SecretValuesArity { expected: usize, got: usize },
    /// A secret value is not a finite number.
    BadSecretValue { index: usize, value: f64 },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptySpace { field } => write!(f, "{field} must not be empty"),
            Self::DuplicateLabel { field, label } => {
                write!(f, "duplicate {field} label `{label}`")
            }
            Self::ShapeMismatch {
                action,
                expected_rows,
                expected_cols,
                rows,
                cols,
            } => write!(
                f,
                "action `{action}`: matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}"
            ),
            Self::BadEntry {
                action,
                row,
                col,
                value,
            } => write!(
                f,
                "action `{action}`: entry [{row}][{col}] = {value} is not a probability"
            ),
            Self::NonStochasticRow { action, row, sum } => {
                write!(f, "action `{action}`: row {row} sums to {sum}, expected 1")
            }
            Self::BadPrior { detail } => write!(f, "prior: {detail}"),
            Self::SecretValuesArity { expected, got } => {
                write!(f, "secret_values has {got} entries, expected {expected}")
            }
            Self::BadSecretValue { index, value } => {
                write!(f, "secret_values[{index}] = {value} is not finite")
            }
        }
    }
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, QifError>;
