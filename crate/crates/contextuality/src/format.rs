//! Model files and report rendering: a JSON schema for scenarios and
//! models, plus table and CSV renderings of the same data.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_traits::One;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    AssignmentKey, Distribution, EmpiricalModel, ModelError, Rational, Semiring,
};
use crate::scenario::{MeasurementScenario, ScenarioError};
use crate::solver::all_assignments;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("row {context:?}: cannot read {text:?} as an assignment over the outcome alphabet")]
    BadAssignment { context: String, text: String },
    #[error("row {context:?}: cannot read {text:?} as a rational value")]
    BadValue { context: String, text: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// On-disk schema. `weights` maps assignment strings (concatenated
/// outcome labels in context order) to values rendered as integers or
/// `p/q` fractions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub scenario: ScenarioBlock,
    pub model: ModelBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioBlock {
    pub measurements: Vec<String>,
    pub outcomes: Vec<String>,
    pub cover: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelBlock {
    pub semiring: Semiring,
    pub rows: Vec<RowBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowBlock {
    pub context: Vec<String>,
    pub weights: BTreeMap<String, Value>,
}

/// Splits an assignment string into outcome indices by greedy
/// longest-prefix matching against the outcome labels.
pub fn parse_assignment(
    scenario: &MeasurementScenario,
    len: usize,
    text: &str,
) -> Option<AssignmentKey> {
    let mut key = Vec::with_capacity(len);
    let mut rest = text;
    while !rest.is_empty() {
        let best = scenario
            .outcomes()
            .iter()
            .enumerate()
            .filter(|(_, o)| rest.starts_with(o.as_str()))
            .max_by_key(|(_, o)| o.len())?;
        key.push(best.0);
        rest = &rest[best.1.len()..];
    }
    (key.len() == len).then_some(key)
}

fn parse_value(v: &Value) -> Option<Rational> {
    match v {
        Value::String(s) => Rational::from_str(s.trim()).ok(),
        Value::Number(n) => n.as_i64().map(|i| Rational::from_integer(i.into())),
        _ => None,
    }
}

/// Renders a rational as an integer when the denominator is 1, else
/// `p/q`.
pub fn render_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_model_file(text: &str) -> Result<EmpiricalModel, FormatError> {
    let file: ModelFile = serde_json::from_str(text)?;
    model_from_file(&file)
}

pub fn model_from_file(file: &ModelFile) -> Result<EmpiricalModel, FormatError> {
    let scenario = MeasurementScenario::new(
        file.scenario.measurements.clone(),
        file.scenario.outcomes.clone(),
        file.scenario.cover.clone(),
    )?;
    let mut rows = Vec::new();
    for row in &file.model.rows {
        let context = scenario.context_from_labels(&row.context)?;
        let label = scenario.context_label(&context);
        let mut weights = BTreeMap::new();
        for (text, value) in &row.weights {
            let key = parse_assignment(&scenario, context.len(), text).ok_or_else(|| {
                FormatError::BadAssignment { context: label.clone(), text: text.clone() }
            })?;
            let v = parse_value(value).ok_or_else(|| FormatError::BadValue {
                context: label.clone(),
                text: value.to_string(),
            })?;
            weights.insert(key, v);
        }
        rows.push(Distribution::new(file.model.semiring, context, weights));
    }
    Ok(EmpiricalModel::new(scenario, file.model.semiring, rows)?)
}

pub fn file_from_model(model: &EmpiricalModel) -> ModelFile {
    let s = model.scenario();
    let cover = s
        .cover()
        .iter()
        .map(|c| c.iter().map(|&i| s.measurements()[i].clone()).collect())
        .collect();
    let rows = model
        .rows()
        .iter()
        .map(|row| RowBlock {
            context: row
                .context()
                .iter()
                .map(|&i| s.measurements()[i].clone())
                .collect(),
            weights: row
                .weights()
                .iter()
                .map(|(k, v)| {
                    (s.assignment_label(k), Value::String(render_rational(v)))
                })
                .collect(),
        })
        .collect();
    ModelFile {
        scenario: ScenarioBlock {
            measurements: s.measurements().to_vec(),
            outcomes: s.outcomes().to_vec(),
            cover,
        },
        model: ModelBlock { semiring: model.semiring(), rows },
    }
}

pub fn render_json(model: &EmpiricalModel) -> String {
    serde_json::to_string_pretty(&file_from_model(model)).expect("schema serializes")
}

/// Plain-text table: one row per context, one column per assignment
/// string in lexicographic order. Contexts of different sizes get
/// separate tables stacked with a blank line between them.
pub fn render_table(model: &EmpiricalModel) -> String {
    let s = model.scenario();
    let mut sizes: Vec<usize> = model.rows().iter().map(|r| r.context().len()).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut blocks = Vec::new();
    for size in sizes {
        let mut columns: Vec<(AssignmentKey, String)> = all_assignments(size, s.outcomes().len())
            .into_iter()
            .map(|k| {
                let label = s.assignment_label(&k);
                (k, label)
            })
            .collect();
        columns.sort_by(|a, b| a.1.cmp(&b.1));
        let mut grid: Vec<Vec<String>> = Vec::new();
        let mut header = vec![String::new()];
        header.extend(columns.iter().map(|(_, l)| l.clone()));
        grid.push(header);
        for row in model.rows().iter().filter(|r| r.context().len() == size) {
            let mut line = vec![s.context_label(row.context())];
            line.extend(columns.iter().map(|(k, _)| render_rational(&row.weight(k))));
            grid.push(line);
        }
        blocks.push(align_grid(&grid));
    }
    blocks.join("\n")
}

fn align_grid(grid: &[Vec<String>]) -> String {
    let cols = grid[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|j| grid.iter().map(|row| row[j].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in grid {
        let mut line = String::new();
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                line.push_str("  ");
            }
            line.push_str(&format!("{:>width$}", cell, width = widths[j]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// CSV rendering: `context,assignment,value`, every assignment of every
/// context, zeros included.
pub fn render_csv(model: &EmpiricalModel) -> String {
    let s = model.scenario();
    let mut out = String::from("context,assignment,value\n");
    for row in model.rows() {
        let ctx = s.context_label(row.context());
        let mut keys: Vec<(String, AssignmentKey)> =
            all_assignments(row.context().len(), s.outcomes().len())
                .into_iter()
                .map(|k| (s.assignment_label(&k), k))
                .collect();
        keys.sort();
        for (label, key) in keys {
            out.push_str(&format!(
                "{},{},{}\n",
                ctx,
                label,
                render_rational(&row.weight(&key))
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use num_traits::Zero;

    #[test]
    fn round_trip_all_catalog_models() {
        for entry in catalog::entries() {
            let rendered = render_json(&entry.model);
            let parsed = parse_model_file(&rendered).unwrap_or_else(|e| {
                panic!("{}: {e}", entry.name);
            });
            assert_eq!(parsed, entry.model, "{}", entry.name);
        }
    }

    #[test]
    fn parse_chsh_values() {
        let chsh = catalog::get("chsh").unwrap().model;
        let text = render_json(&chsh);
        let parsed = parse_model_file(&text).unwrap();
        let key = vec![0, 0];
        assert_eq!(
            parsed.rows()[0].weight(&key),
            Rational::new(1.into(), 2.into())
        );
        assert_eq!(
            parsed.rows()[1].weight(&key),
            Rational::new(3.into(), 8.into())
        );
    }

    #[test]
    fn bad_row_sum_is_a_normalization_error() {
        let text = r#"{
          "scenario": {
            "measurements": ["A", "B"],
            "outcomes": ["0", "1"],
            "cover": [["A", "B"]]
          },
          "model": {
            "semiring": "probability",
            "rows": [
              {"context": ["A", "B"], "weights": {"00": "1/2", "11": "3/8"}}
            ]
          }
        }"#;
        match parse_model_file(text) {
            Err(FormatError::Model(ModelError::NormalizationError { .. })) => {}
            other => panic!("expected normalization error, got {other:?}"),
        }
    }

    #[test]
    fn bad_assignment_and_value_are_reported() {
        let base = |weights: &str| {
            format!(
                r#"{{
                  "scenario": {{
                    "measurements": ["A", "B"],
                    "outcomes": ["0", "1"],
                    "cover": [["A", "B"]]
                  }},
                  "model": {{
                    "semiring": "boolean",
                    "rows": [{{"context": ["A", "B"], "weights": {weights}}}]
                  }}
                }}"#
            )
        };
        assert!(matches!(
            parse_model_file(&base(r#"{"02": 1}"#)),
            Err(FormatError::BadAssignment { .. })
        ));
        assert!(matches!(
            parse_model_file(&base(r#"{"00": "x"}"#)),
            Err(FormatError::BadValue { .. })
        ));
        assert!(parse_model_file(&base(r#"{"00": 1, "11": "1"}"#)).is_ok());
    }

    #[test]
    fn multi_character_outcome_labels_parse_greedily() {
        let s = MeasurementScenario::new(
            vec!["A".into(), "B".into()],
            vec!["up".into(), "down".into()],
            vec![vec!["A".into(), "B".into()]],
        )
        .unwrap();
        assert_eq!(parse_assignment(&s, 2, "updown"), Some(vec![0, 1]));
        assert_eq!(parse_assignment(&s, 2, "downdown"), Some(vec![1, 1]));
        assert_eq!(parse_assignment(&s, 2, "up"), None);
        assert_eq!(parse_assignment(&s, 2, "upx"), None);
    }

    #[test]
    fn triangle_table_is_stable() {
        let t = catalog::get("triangle").unwrap().model;
        let expected = "     00  01  10  11\n\
                        A B   0   1   1   0\n\
                        B C   0   1   1   0\n\
                        A C   0   1   1   0\n";
        assert_eq!(render_table(&t), expected);
    }

    #[test]
    fn csv_has_all_cells() {
        let t = catalog::get("triangle").unwrap().model;
        let csv = render_csv(&t);
        assert_eq!(csv.lines().count(), 1 + 3 * 4);
        assert!(csv.lines().any(|l| l == "A B,01,1"));
        assert!(csv.lines().any(|l| l == "A B,00,0"));
    }

    #[test]
    fn rational_rendering() {
        assert_eq!(render_rational(&Rational::from_integer(3.into())), "3");
        assert_eq!(render_rational(&Rational::new(3.into(), 8.into())), "3/8");
        assert_eq!(render_rational(&Rational::zero()), "0");
    }
}
