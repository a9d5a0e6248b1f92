//! Explainability exports: Sankey flows, confusion matrices and scenario
//! comparison tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::classifier::{ClassificationResult, ThresholdStatus};
use crate::domain::{Grade, GradeMap};
use crate::error::{Error, Result};
use crate::format::sig;

/// Flows below this value are dropped from Sankey exports.
pub const FLOW_PRUNE: f64 = 1e-12;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SankeyFlow {
    pub source: String,
    pub target: String,
    pub value: f64,
}

/// Equal weight for every result's scenario.
pub fn uniform_weights(results: &[ClassificationResult]) -> BTreeMap<String, f64> {
    let w = 1.0 / results.len() as f64;
    results.iter().map(|r| (r.scenario_id.clone(), w)).collect()
}

/// Component -> scenario -> grade flows. Grade nodes are shared across
/// scenarios and labelled `A`..`E`.
pub fn sankey_flows(
    component_id: &str,
    results: &[ClassificationResult],
    weights: &BTreeMap<String, f64>,
) -> Result<Vec<SankeyFlow>> {
    for (id, &w) in weights {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::Weights(format!("weight for {id} is {w}")));
        }
        if !results.iter().any(|r| &r.scenario_id == id) {
            return Err(Error::Weights(format!("weight given for unknown scenario {id}")));
        }
    }
    let mut flows = Vec::new();
    for r in results {
        let w = *weights
            .get(&r.scenario_id)
            .ok_or_else(|| Error::Weights(format!("no weight for scenario {}", r.scenario_id)))?;
        flows.push(SankeyFlow {
            source: component_id.to_string(),
            target: r.scenario_id.clone(),
            value: w,
        });
        for (g, &p) in r.posterior.probs().iter() {
            let value = w * p;
            if value >= FLOW_PRUNE {
                flows.push(SankeyFlow {
                    source: r.scenario_id.clone(),
                    target: g.to_string(),
                    value,
                });
            }
        }
    }
    let total: f64 = weights.values().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::Weights(format!("weights sum to {total}, expected 1")));
    }
    Ok(flows)
}

/// Parses `U1=0.5,U2=0.5`.
pub fn parse_weights(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (id, w) = part
            .split_once('=')
            .ok_or_else(|| Error::Weights(format!("expected id=weight, got {part:?}")))?;
        let w: f64 = w
            .trim()
            .parse()
            .map_err(|_| Error::Weights(format!("bad weight {w:?} for {id}")))?;
        if out.insert(id.trim().to_string(), w).is_some() {
            return Err(Error::Weights(format!("duplicate weight for {id}")));
        }
    }
    Ok(out)
}

/// Counts indexed by (true grade, predicted grade).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    counts: GradeMap<GradeMap<usize>>,
}

impl ConfusionMatrix {
    pub fn get(&self, truth: Grade, predicted: Grade) -> usize {
        self.counts[truth][predicted]
    }

    pub fn total(&self) -> usize {
        self.counts.values().iter().map(|row| row.values().iter().sum::<usize>()).sum()
    }

    /// Per-true-grade totals.
    pub fn row_sums(&self) -> GradeMap<usize> {
        self.counts.map(|_, row| row.values().iter().sum())
    }

    /// Rows are true grades, columns predicted grades.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("truth\\predicted,A,B,C,D,E\n");
        for (t, row) in self.counts.iter() {
            let cells: Vec<String> = row.values().iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "{t},{}", cells.join(","));
        }
        out
    }
}

pub fn confusion_matrix(predicted: &[Grade], truth: &[Grade]) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let mut m = ConfusionMatrix::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        m.counts[t][p] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub scenario_id: String,
    pub grade: Grade,
    pub probability: f64,
    pub threshold_passes: usize,
    pub threshold_failures: usize,
}

/// One row per result, sorted by scenario id.
pub fn comparison_table(results: &[ClassificationResult]) -> Vec<ComparisonRow> {
    let mut rows: Vec<ComparisonRow> = results
        .iter()
        .map(|r| {
            let passes = r
                .threshold_report
                .values()
                .filter(|&&s| s == ThresholdStatus::Pass)
                .count();
            ComparisonRow {
                scenario_id: r.scenario_id.clone(),
                grade: r.final_grade,
                probability: r.final_probability(),
                threshold_passes: passes,
                threshold_failures: r.threshold_report.len() - passes,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
    rows
}

pub fn comparison_csv(rows: &[ComparisonRow], digits: usize) -> String {
    let mut out = String::from("scenario,grade,probability,threshold_passes,threshold_failures\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.scenario_id,
            r.grade,
            sig(r.probability, digits),
            r.threshold_passes,
            r.threshold_failures
        );
    }
    out
}

pub fn comparison_text(rows: &[ComparisonRow], digits: usize) -> String {
    let header = ["scenario", "grade", "probability", "passes", "failures"];
    let body: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.scenario_id.clone(),
                r.grade.to_string(),
                sig(r.probability, digits),
                r.threshold_passes.to_string(),
                r.threshold_failures.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: &[&str], out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&header, &mut out);
    for row in &body {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&cells, &mut out);
    }
    out
}
