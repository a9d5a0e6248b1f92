//! Scenario-conditioned naive Bayes grading.
//!
//! For a record `F` and scenario `U`:
//!
//! ```text
//! joint(G)     = Π_k P(F_k | G, U)
//! evidence     = Σ_G joint(G) · P(G | U)
//! posterior(G) = joint(G) · P(G | U) / evidence
//! ```
//!
//! The final grade is the posterior argmax, with ties resolved toward the
//! worse grade.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{
    argmax_worse_on_tie, ComponentRecord, Grade, GradeDistribution, GradeMap, ScenarioSpec,
};
use crate::error::{Error, Result};
use crate::likelihood::{feature_likelihood, likelihood_vector};

/// Factors below this switch the product to log space.
const UNDERFLOW_GUARD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub scenario_id: String,
    pub posterior: GradeDistribution,
    pub final_grade: Grade,
    pub joints: GradeMap<f64>,
    pub evidence: f64,
    pub threshold_report: BTreeMap<String, ThresholdStatus>,
    pub per_feature_best: BTreeMap<String, Grade>,
}

impl ClassificationResult {
    pub fn final_probability(&self) -> f64 {
        self.posterior.get(self.final_grade)
    }
}

fn check_factors(factors: &[f64]) -> Result<()> {
    if factors.is_empty() {
        return Err(Error::EmptyLikelihoods);
    }
    for &f in factors {
        if !(f.is_finite() && f >= 0.0) {
            return Err(Error::NegativeInput {
                what: "likelihood".into(),
                value: f,
            });
        }
    }
    Ok(())
}

/// Natural log of the product, or `None` when a factor is zero.
fn log_product(factors: &[f64]) -> Option<f64> {
    if factors.contains(&0.0) {
        return None;
    }
    Some(factors.iter().map(|f| f.ln()).sum())
}

/// Product of per-feature likelihoods.
///
/// Factors are multiplied in ascending order so the result does not depend on
/// feature order. Tiny factors go through log space.
pub fn joint_likelihood(likelihoods: &[f64]) -> Result<f64> {
    check_factors(likelihoods)?;
    let mut sorted = likelihoods.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == 0.0 {
        return Ok(0.0);
    }
    let direct: f64 = sorted.iter().product();
    if sorted[0] < UNDERFLOW_GUARD || !direct.is_normal() {
        return Ok(log_product(&sorted).map_or(0.0, f64::exp));
    }
    Ok(direct)
}

fn check_grade_inputs(what: &str, values: &GradeMap<f64>) -> Result<()> {
    for (g, &v) in values.iter() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::NegativeInput {
                what: format!("{what} for grade {g}"),
                value: v,
            });
        }
    }
    Ok(())
}

/// Total probability of the observations: `Σ_G joints[G] · priors[G]`.
pub fn evidence(joints: &GradeMap<f64>, priors: &GradeMap<f64>) -> Result<f64> {
    check_grade_inputs("joint", joints)?;
    check_grade_inputs("prior", priors)?;
    Ok(Grade::ALL.iter().map(|&g| joints[g] * priors[g]).sum())
}

/// Raw Bayes quotients `joints[G] · priors[G] / evidence` for a caller-supplied
/// evidence value. No renormalization is applied, so the result only sums to
/// one when `evidence` is the true weighted sum.
pub fn posterior_terms(
    joints: &GradeMap<f64>,
    priors: &GradeMap<f64>,
    evidence: f64,
) -> Result<GradeMap<f64>> {
    check_grade_inputs("joint", joints)?;
    check_grade_inputs("prior", priors)?;
    if !(evidence.is_finite() && evidence > 0.0) {
        return Err(Error::ZeroEvidence);
    }
    Ok(GradeMap::from_fn(|g| joints[g] * priors[g] / evidence))
}

pub fn posterior(joints: &GradeMap<f64>, priors: &GradeMap<f64>) -> Result<GradeDistribution> {
    let ev = evidence(joints, priors)?;
    if ev <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    let terms = posterior_terms(joints, priors, ev)?;
    // Division by the exact weighted sum leaves only rounding drift.
    GradeDistribution::from_weights(terms)
}

/// Posterior from log-weights, for joints that underflow in linear space.
fn posterior_from_logs(log_weights: &GradeMap<Option<f64>>) -> Result<GradeDistribution> {
    let max = log_weights
        .values()
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::ZeroEvidence);
    }
    GradeDistribution::from_weights(log_weights.map(|_, lw| lw.map_or(0.0, |l| (l - max).exp())))
}

/// Pass/fail per thresholded feature; bounds are inclusive.
pub fn check_thresholds(
    record: &ComponentRecord,
    scenario: &ScenarioSpec,
) -> Result<BTreeMap<String, ThresholdStatus>> {
    scenario
        .thresholds()
        .map(|(id, t)| {
            let v = record
                .get(id)
                .ok_or_else(|| Error::MissingFeature(id.to_string()))?;
            let status = if t.admits(v) {
                ThresholdStatus::Pass
            } else {
                ThresholdStatus::Fail
            };
            Ok((id.to_string(), status))
        })
        .collect()
}

pub fn classify(record: &ComponentRecord, scenario: &ScenarioSpec) -> Result<ClassificationResult> {
    let priors = scenario.priors();
    let vectors = GradeMap::<Vec<f64>>::default()
        .try_map(|g, _| likelihood_vector(record, scenario, g))?;
    let joints = vectors.try_map(|_, lv| joint_likelihood(lv))?;
    let ev = evidence(&joints, priors)?;

    let log_weights = vectors.map(|g, lv| {
        let lp = log_product(lv)?;
        (priors[g] > 0.0).then(|| lp + priors[g].ln())
    });
    let underflowed = Grade::ALL
        .iter()
        .any(|&g| log_weights[g].is_some() && !(joints[g] * priors[g]).is_normal());
    let posterior = if underflowed {
        posterior_from_logs(&log_weights)?
    } else {
        posterior(&joints, priors)?
    };

    let threshold_report = check_thresholds(record, scenario)?;
    let per_feature_best = scenario
        .features()
        .iter()
        .map(|f| {
            let v = record.value_for(&f.def)?;
            let liks = GradeMap::<f64>::default()
                .try_map(|g, _| feature_likelihood(&f.def.id, v, &f.model, g))?;
            Ok((f.def.id.clone(), argmax_worse_on_tie(&liks)))
        })
        .collect::<Result<_>>()?;

    Ok(ClassificationResult {
        scenario_id: scenario.id().to_string(),
        final_grade: posterior.argmax(),
        posterior,
        joints,
        evidence: ev,
        threshold_report,
        per_feature_best,
    })
}

/// Classifies `record` under each scenario. Failures are reported per
/// scenario; output order matches `scenarios`.
pub fn classify_all(
    record: &ComponentRecord,
    scenarios: &[ScenarioSpec],
) -> Vec<Result<ClassificationResult>> {
    scenarios.par_iter().map(|s| classify(record, s)).collect()
}
