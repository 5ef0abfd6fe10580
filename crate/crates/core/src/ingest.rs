//! Building a mechanism from a tabular dataset.
//!
//! The model: a table has one row per secret (identified by a unique secret
//! column) and one column per queryable attribute. Each attribute becomes an
//! action; querying it returns the cell value for the hidden row. With a
//! noise radius `w` on an integer column, the returned value is instead
//! uniform on the true value plus or minus `w`, giving `2w + 1` equally
//! likely outcomes.
//!
//! The observation alphabet is shared across actions: it concatenates each
//! selected column's distinct values (plus noisy neighbors), column by
//! column in selection order. Within a column, values sort numerically when
//! every value parses as an integer and lexicographically otherwise,
//! de-duplicated across the whole alphabet.
//!
//! When every secret id parses as a number, the ids double as the numeric
//! secret values, enabling the variance measure on ingested tables.

use std::collections::BTreeSet;
use std::io::Read;

use crate::error::{QifError, Result};
use crate::mechanism::{ActionFile, Mechanism, MechanismFile};

/// Uniform noise on an integer column: the reported value is the true value
/// plus an offset drawn uniformly from `-radius..=radius`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoiseSpec {
    pub column: String,
    pub radius: u32,
}

/// Read a CSV table (with header) and build the mechanism whose actions are
/// the selected attribute columns.
///
/// `noise` entries must name columns in `attributes`; their cells must all
/// parse as integers.
pub fn ingest_csv<R: Read>(
    reader: R,
    secret_column: &str,
    attributes: &[String],
    noise: &[NoiseSpec],
) -> Result<Mechanism> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = csv
        .headers()
        .map_err(|e| QifError::Parse(format!("reading CSV header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();

    let column_id = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| QifError::MissingColumn(name.to_string()))
    };
    let secret_col = column_id(secret_column)?;
    let attr_cols: Vec<usize> = attributes
        .iter()
        .map(|a| column_id(a))
        .collect::<Result<_>>()?;
    for spec in noise {
        if !attributes.contains(&spec.column) {
            return Err(QifError::MissingColumn(spec.column.clone()));
        }
    }

    // Materialize the table: one row per record, selected columns only.
    let mut secrets: Vec<String> = Vec::new();
    let mut cells: Vec<Vec<String>> = Vec::new();
    for (row_idx, record) in csv.records().enumerate() {
        let record = record.map_err(|e| QifError::Parse(format!("reading CSV row: {e}")))?;
        let field = |col: usize| -> Result<String> {
            record
                .get(col)
                .map(str::to_string)
                .ok_or_else(|| QifError::Parse(format!("row {} is too short", row_idx + 2)))
        };
        secrets.push(field(secret_col)?);
        cells.push(attr_cols.iter().map(|&c| field(c)).collect::<Result<_>>()?);
    }
    if secrets.is_empty() {
        return Err(QifError::Parse("table has no data rows".to_string()));
    }
    for (i, s) in secrets.iter().enumerate() {
        if secrets[..i].contains(s) {
            return Err(QifError::DuplicateSecretIds(s.clone()));
        }
    }

    // Per-attribute outcome sets, then the shared observation alphabet.
    let radius_of = |attr: &str| -> Option<u32> {
        noise.iter().find(|s| s.column == *attr).map(|s| s.radius)
    };
    let mut observations: Vec<String> = Vec::new();
    let mut per_attr_outcomes: Vec<Vec<Vec<String>>> = Vec::new(); // [attr][row] -> outcomes
    for (a, attr) in attributes.iter().enumerate() {
        let column: Vec<&str> = cells.iter().map(|row| row[a].as_str()).collect();
        let outcomes: Vec<Vec<String>> = match radius_of(attr) {
            Some(radius) => {
                let parsed: Vec<i64> = column
                    .iter()
                    .map(|cell| {
                        cell.parse().map_err(|_| QifError::NonNumericNoiseColumn {
                            column: attr.clone(),
                            cell: (*cell).to_string(),
                        })
                    })
                    .collect::<Result<_>>()?;
                parsed
                    .iter()
                    .map(|&v| {
                        (v - i64::from(radius)..=v + i64::from(radius))
                            .map(|o| o.to_string())
                            .collect()
                    })
                    .collect()
            }
            None => column.iter().map(|cell| vec![(*cell).to_string()]).collect(),
        };
        // This attribute's block of the alphabet: distinct outcomes, sorted
        // numerically when uniformly integer, else lexicographically.
        let distinct: BTreeSet<String> = outcomes.iter().flatten().cloned().collect();
        let mut block: Vec<String> = distinct.into_iter().collect();
        if let Ok(numeric) = block
            .iter()
            .map(|v| v.parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
        {
            let mut pairs: Vec<(i64, String)> = numeric.into_iter().zip(block).collect();
            pairs.sort();
            block = pairs.into_iter().map(|(_, v)| v).collect();
        }
        for value in block {
            if !observations.contains(&value) {
                observations.push(value);
            }
        }
        per_attr_outcomes.push(outcomes);
    }

    let n = secrets.len();
    let cols = observations.len();
    let actions = attributes
        .iter()
        .enumerate()
        .map(|(a, attr)| {
            let mut matrix = vec![vec![0.0; cols]; n];
            for (x, outcomes) in per_attr_outcomes[a].iter().enumerate() {
                let p = 1.0 / outcomes.len() as f64;
                for outcome in outcomes {
                    let y = observations.iter().position(|o| o == outcome).unwrap();
                    matrix[x][y] += p;
                }
            }
            ActionFile {
                name: attr.clone(),
                matrix,
            }
        })
        .collect();

    // Numeric ids double as secret values so the variance measure works on
    // ingested tables.
    let parsed_ids: Option<Vec<f64>> = secrets
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();

    Mechanism::from_file(MechanismFile {
        secrets,
        observations,
        actions,
        prior: None,
        secret_values: parsed_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "\
id,ZIP,Age,Date
1,z1,65,d2
2,z1,65,d2
3,z1,67,d2
4,z1,68,d1
5,z1,68,d1
6,z3,66,d2
7,z3,67,d2
8,z3,31,d2
9,z2,30,d3
10,z2,31,d3
";

    fn attrs(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn builds_deterministic_lookup_actions() {
        let m = ingest_csv(TABLE.as_bytes(), "id", &attrs(&["ZIP", "Age", "Date"]), &[]).unwrap();
        assert_eq!(m.secret_count(), 10);
        assert_eq!(m.action_count(), 3);
        assert!(m.is_deterministic());
        // ZIP block first (lexicographic), then Age (numeric), then Date.
        assert_eq!(
            m.observations(),
            &["z1", "z2", "z3", "30", "31", "65", "66", "67", "68", "d1", "d2", "d3"]
        );
        // Secret 6 (row "6") has ZIP z3.
        let zip = m.action_index("ZIP").unwrap();
        let z3 = m.observation_index("z3").unwrap();
        assert_eq!(m.prob(zip, 5, z3), 1.0);
        // Numeric ids became secret values.
        assert_eq!(m.secret_values().unwrap()[9], 10.0);
    }

    #[test]
    fn noise_spreads_uniformly() {
        let m = ingest_csv(
            TABLE.as_bytes(),
            "id",
            &attrs(&["ZIP", "Age", "Date"]),
            &[NoiseSpec {
                column: "Age".to_string(),
                radius: 1,
            }],
        )
        .unwrap();
        assert!(!m.is_deterministic());
        // The Age block now spans 29..=69 around the true ages.
        assert_eq!(
            m.observations(),
            &["z1", "z2", "z3", "29", "30", "31", "32", "64", "65", "66", "67", "68", "69",
              "d1", "d2", "d3"]
        );
        let age = m.action_index("Age").unwrap();
        for obs in ["64", "65", "66"] {
            let y = m.observation_index(obs).unwrap();
            assert!((m.prob(age, 0, y) - 1.0 / 3.0).abs() < 1e-12);
        }
        // Rows still sum to 1 (validation would have failed otherwise).
        let zip = m.action_index("ZIP").unwrap();
        let z1 = m.observation_index("z1").unwrap();
        assert_eq!(m.prob(zip, 0, z1), 1.0);
    }

    #[test]
    fn missing_columns_and_duplicates_fail() {
        assert!(matches!(
            ingest_csv(TABLE.as_bytes(), "uid", &attrs(&["ZIP"]), &[]),
            Err(QifError::MissingColumn(c)) if c == "uid"
        ));
        assert!(matches!(
            ingest_csv(TABLE.as_bytes(), "id", &attrs(&["Salary"]), &[]),
            Err(QifError::MissingColumn(_))
        ));
        // Noise on an unselected column is an error, not silently ignored.
        assert!(matches!(
            ingest_csv(
                TABLE.as_bytes(),
                "id",
                &attrs(&["ZIP"]),
                &[NoiseSpec { column: "Age".to_string(), radius: 1 }]
            ),
            Err(QifError::MissingColumn(_))
        ));
        let dup = "id,ZIP\n1,z1\n1,z2\n";
        assert!(matches!(
            ingest_csv(dup.as_bytes(), "id", &attrs(&["ZIP"]), &[]),
            Err(QifError::DuplicateSecretIds(s)) if s == "1"
        ));
    }

    #[test]
    fn noise_requires_integer_cells() {
        assert!(matches!(
            ingest_csv(
                TABLE.as_bytes(),
                "id",
                &attrs(&["ZIP"]),
                &[NoiseSpec { column: "ZIP".to_string(), radius: 1 }]
            ),
            Err(QifError::NonNumericNoiseColumn { .. })
        ));
    }

    #[test]
    fn non_numeric_ids_leave_values_unset() {
        let table = "name,city\nalice,rome\nbob,oslo\n";
        let m = ingest_csv(table.as_bytes(), "name", &attrs(&["city"]), &[]).unwrap();
        assert!(m.secret_values().is_none());
        assert_eq!(m.secrets(), &["alice", "bob"]);
    }
}
