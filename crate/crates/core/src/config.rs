//! Scenario configuration and record/dataset file formats.
//!
//! Scenario configs are JSON:
//!
//! ```json
//! {"metadata": {"name": "...", "version": "..."},
//!  "scenarios": [{"id": "U1", "label": "...",
//!                 "priors": {"A": 0.15, "B": 0.25, "C": 0.30, "D": 0.20, "E": 0.10},
//!                 "features": [{"id": "F1", "name": "...", "unit": "%",
//!                               "kind": "continuous",
//!                               "thresholds": {"min": 75},
//!                               "likelihood": {"gaussian": {"A": {"mu": 90, "sigma": 5}, ...}}}]}]}
//! ```
//!
//! Bounded features use `"kind": "bounded_table"` with
//! `"likelihood": {"table": [{"lo": 0, "hi": 100, "probs": {...}}]}`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::domain::{
    parse_grade, ComponentRecord, FeatureDef, FeatureKind, Grade, GradeMap, ScenarioFeature,
    ScenarioSpec, Threshold,
};
use crate::dtree::LabeledDataset;
use crate::error::{Error, Result};
use crate::likelihood::LikelihoodModel;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureEntry {
    id: String,
    #[serde(default)]
    name: String,
    #[serde(default)]
    unit: String,
    kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thresholds: Option<Threshold>,
    likelihood: LikelihoodModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioEntry {
    id: String,
    #[serde(default)]
    label: String,
    priors: GradeMap<f64>,
    features: Vec<FeatureEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioConfigFile {
    #[serde(default)]
    metadata: Metadata,
    scenarios: Vec<ScenarioEntry>,
}

/// A loaded and validated configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub metadata: Metadata,
    pub scenarios: Vec<ScenarioSpec>,
}

impl ScenarioConfig {
    pub fn scenario(&self, id: &str) -> Result<&ScenarioSpec> {
        self.scenarios
            .iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| Error::UnknownScenario(id.to_string()))
    }

    pub fn to_json(&self) -> String {
        let file = ScenarioConfigFile {
            metadata: self.metadata.clone(),
            scenarios: self
                .scenarios
                .iter()
                .map(|s| ScenarioEntry {
                    id: s.id().to_string(),
                    label: s.label().to_string(),
                    priors: *s.priors(),
                    features: s
                        .features()
                        .iter()
                        .map(|f| FeatureEntry {
                            id: f.def.id.clone(),
                            name: f.def.name.clone(),
                            unit: f.def.unit.clone(),
                            kind: f.def.kind,
                            thresholds: f.threshold,
                            likelihood: f.model.clone(),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("config serializes")
    }
}

pub fn load_config(text: &str) -> Result<ScenarioConfig> {
    let file: ScenarioConfigFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
    let mut seen = BTreeSet::new();
    let mut scenarios = Vec::with_capacity(file.scenarios.len());
    for entry in file.scenarios {
        if !seen.insert(entry.id.clone()) {
            return Err(Error::DuplicateScenario(entry.id));
        }
        let features = entry
            .features
            .into_iter()
            .map(|f| ScenarioFeature {
                def: FeatureDef {
                    id: f.id,
                    name: f.name,
                    unit: f.unit,
                    kind: f.kind,
                },
                model: f.likelihood,
                threshold: f.thresholds,
            })
            .collect();
        scenarios.push(ScenarioSpec::new(entry.id, entry.label, entry.priors, features)?);
    }
    Ok(ScenarioConfig {
        metadata: file.metadata,
        scenarios,
    })
}

/// Parses and validates every scenario in a config document.
pub fn load_scenario_config(text: &str) -> Result<Vec<ScenarioSpec>> {
    Ok(load_config(text)?.scenarios)
}

fn number_from_text(feature: &str, text: &str) -> Result<f64> {
    let v: f64 = text.trim().parse().map_err(|_| Error::NonNumeric {
        feature: feature.to_string(),
        text: text.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            what: format!("feature {feature}"),
            value: v,
        });
    }
    Ok(v)
}

/// Loads one component from JSON (`{"component_id": .., "values": {..}}`) or
/// from a CSV with a header of feature ids (plus optional `component_id`)
/// and a single data row.
pub fn load_component(text: &str) -> Result<ComponentRecord> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Err(Error::Parse("component document is empty".into()));
    }
    if trimmed.starts_with('{') {
        load_component_json(trimmed)
    } else {
        load_component_csv(trimmed)
    }
}

fn load_component_json(text: &str) -> Result<ComponentRecord> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("component: {e}")))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Parse("component must be a JSON object".into()))?;
    let id = match obj.get("component_id") {
        None => "component".to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    };
    let values = obj
        .get("values")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Parse("component needs a \"values\" object".into()))?;
    let mut out = Vec::with_capacity(values.len());
    for (k, v) in values {
        let x = match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::NonNumeric {
                feature: k.clone(),
                text: n.to_string(),
            })?,
            Value::String(s) => number_from_text(k, s)?,
            other => {
                return Err(Error::NonNumeric {
                    feature: k.clone(),
                    text: other.to_string(),
                })
            }
        };
        out.push((k.clone(), x));
    }
    ComponentRecord::new(id, out)
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn load_component_csv(text: &str) -> Result<ComponentRecord> {
    let mut rdr = csv_reader(text);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("component csv: {e}")))?
        .clone();
    let mut rows = rdr.records();
    let row = rows
        .next()
        .ok_or_else(|| Error::Parse("component csv has no data row".into()))?
        .map_err(|e| Error::Parse(format!("component csv: {e}")))?;
    if rows.next().is_some() {
        return Err(Error::Parse("component csv must hold exactly one data row".into()));
    }
    let mut id = "component".to_string();
    let mut values = Vec::new();
    for (h, cell) in headers.iter().zip(row.iter()) {
        if h == "component_id" {
            id = cell.to_string();
        } else {
            values.push((h.to_string(), number_from_text(h, cell)?));
        }
    }
    ComponentRecord::new(id, values)
}

/// Labelled dataset CSV: `component_id,<feature ids...>,grade`. Lines
/// starting with `#` are metadata comments.
pub fn load_dataset(text: &str) -> Result<LabeledDataset> {
    let mut rdr = csv_reader(text);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("dataset csv: {e}")))?
        .clone();
    let grade_col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("grade"))
        .ok_or_else(|| Error::Parse("dataset csv needs a grade column".into()))?;
    let mut records = Vec::new();
    let mut labels = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("dataset csv: {e}")))?;
        let mut id = format!("row{}", line + 1);
        let mut values = Vec::new();
        for (i, (h, cell)) in headers.iter().zip(row.iter()).enumerate() {
            if i == grade_col {
                labels.push(parse_grade(cell)?);
            } else if h == "component_id" {
                id = cell.to_string();
            } else {
                values.push((h.to_string(), number_from_text(h, cell)?));
            }
        }
        records.push(ComponentRecord::new(id, values)?);
    }
    LabeledDataset::new(records, labels)
}

/// Writes a dataset as CSV. Values use the shortest exact representation so
/// a reload reproduces the same floats.
pub fn dataset_to_csv(data: &LabeledDataset, comment: Option<&str>) -> String {
    let features = data.feature_ids();
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str("component_id");
    for f in &features {
        out.push(',');
        out.push_str(f);
    }
    out.push_str(",grade\n");
    for (r, g) in data.records().iter().zip(data.labels()) {
        out.push_str(&r.component_id);
        for f in &features {
            out.push(',');
            out.push_str(&r.values[f].to_string());
        }
        out.push(',');
        out.push(g.label());
        out.push('\n');
    }
    out
}

/// A list of grades, one per row. Uses the `grade` column when a header
/// names one, otherwise the first column; a header row is detected when its
/// first cell is not a grade label.
pub fn load_grades(text: &str) -> Result<Vec<Grade>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("grade csv: {e}")))?;
    let Some(first) = rows.first() else {
        return Ok(Vec::new());
    };
    let has_header = first.get(0).is_none_or(|c| parse_grade(c).is_err());
    let col = if has_header {
        first
            .iter()
            .position(|h| h.eq_ignore_ascii_case("grade"))
            .unwrap_or(0)
    } else {
        0
    };
    rows.iter()
        .skip(usize::from(has_header))
        .map(|r| {
            let cell = r
                .get(col)
                .ok_or_else(|| Error::Parse(format!("grade csv row lacks column {}", col + 1)))?;
            parse_grade(cell)
        })
        .collect()
}
