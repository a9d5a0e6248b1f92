//! Per-feature likelihoods `P(value | grade, scenario)`.
//!
//! Continuous features use one normal density per grade. Bounded features use
//! a piecewise-constant table: each bin carries one likelihood per grade.
//! Table rows are likelihoods, not distributions over grades, so a row need
//! not sum to one.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::{ComponentRecord, FeatureDef, FeatureKind, Grade, GradeMap, ScenarioSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mu: f64,
    pub sigma: f64,
}

/// One half-open interval `[lo, hi)` of a likelihood table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub probs: GradeMap<f64>,
}

impl Bin {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Sorted, non-overlapping bins. The last bin is closed at `hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinTable {
    pub bins: Vec<Bin>,
}

impl BinTable {
    /// Validated constructor; `feature` names the owner in error messages.
    pub fn new(feature: &str, bins: Vec<Bin>) -> Result<Self> {
        let table = BinTable { bins };
        table.validate(feature)?;
        Ok(table)
    }

    fn validate(&self, feature: &str) -> Result<()> {
        let invalid = |message: String| Error::InvalidModel {
            feature: feature.to_string(),
            message,
        };
        if self.bins.is_empty() {
            return Err(invalid("likelihood table has no bins".into()));
        }
        for bin in &self.bins {
            if !(bin.lo.is_finite() && bin.hi.is_finite() && bin.lo < bin.hi) {
                return Err(invalid(format!("bin [{}, {}) needs lo < hi", bin.lo, bin.hi)));
            }
            for (g, &p) in bin.probs.iter() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(format!(
                        "bin [{}, {}) likelihood for grade {g} is {p}, outside [0, 1]",
                        bin.lo, bin.hi
                    )));
                }
            }
        }
        for pair in self.bins.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if b.lo < a.hi {
                if b.hi <= a.lo {
                    return Err(invalid("bins must be sorted by lo".into()));
                }
                return Err(Error::OverlappingBins {
                    feature: feature.to_string(),
                    a_lo: a.lo,
                    a_hi: a.hi,
                    b_lo: b.lo,
                    b_hi: b.hi,
                });
            }
        }
        Ok(())
    }

    /// The bin holding `value`, if any.
    pub fn bin_for(&self, value: f64) -> Option<&Bin> {
        let last = self.bins.len().checked_sub(1)?;
        self.bins.iter().enumerate().find_map(|(i, b)| {
            let inside = b.lo <= value && (value < b.hi || (i == last && value == b.hi));
            inside.then_some(b)
        })
    }

    /// Lowest and highest covered values.
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.bins.first()?.lo, self.bins.last()?.hi))
    }
}

/// Likelihood model attached to a scenario feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodModel {
    Gaussian(GradeMap<GaussianParams>),
    Table(BinTable),
}

impl LikelihoodModel {
    /// Checks the model's own invariants and that its form matches `def.kind`.
    pub fn validate(&self, def: &FeatureDef) -> Result<()> {
        match (self, def.kind) {
            (LikelihoodModel::Gaussian(params), FeatureKind::Continuous) => {
                for (g, p) in params.iter() {
                    if !p.mu.is_finite() || !(p.sigma.is_finite() && p.sigma > 0.0) {
                        return Err(Error::InvalidModel {
                            feature: def.id.clone(),
                            message: format!(
                                "grade {g} needs finite mu and sigma > 0 (mu {}, sigma {})",
                                p.mu, p.sigma
                            ),
                        });
                    }
                }
                Ok(())
            }
            (LikelihoodModel::Table(table), FeatureKind::BoundedTable) => table.validate(&def.id),
            (LikelihoodModel::Gaussian(_), FeatureKind::BoundedTable) => Err(Error::InvalidModel {
                feature: def.id.clone(),
                message: "bounded_table feature needs a table likelihood, found gaussian".into(),
            }),
            (LikelihoodModel::Table(_), FeatureKind::Continuous) => Err(Error::InvalidModel {
                feature: def.id.clone(),
                message: "continuous feature needs a gaussian likelihood, found table".into(),
            }),
        }
    }
}

/// Normal density with mean `mu` and standard deviation `sigma`.
pub fn gaussian_pdf(x: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if !x.is_finite() || !mu.is_finite() {
        return Err(Error::NonFinite {
            what: "gaussian argument".into(),
            value: if x.is_finite() { mu } else { x },
        });
    }
    let z = (x - mu) / sigma;
    Ok((-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt()))
}

/// Row of the bin containing `value`.
pub fn table_lookup<'t>(feature: &str, value: f64, table: &'t BinTable) -> Result<&'t GradeMap<f64>> {
    table
        .bin_for(value)
        .map(|b| &b.probs)
        .ok_or_else(|| Error::OutOfRange {
            feature: feature.to_string(),
            value,
        })
}

pub fn feature_likelihood(
    feature: &str,
    value: f64,
    model: &LikelihoodModel,
    grade: Grade,
) -> Result<f64> {
    match model {
        LikelihoodModel::Gaussian(params) => {
            let p = params[grade];
            gaussian_pdf(value, p.mu, p.sigma)
        }
        LikelihoodModel::Table(table) => Ok(table_lookup(feature, value, table)?[grade]),
    }
}

/// One likelihood per scenario feature, in scenario order.
pub fn likelihood_vector(
    record: &ComponentRecord,
    scenario: &ScenarioSpec,
    grade: Grade,
) -> Result<Vec<f64>> {
    scenario
        .features()
        .iter()
        .map(|f| {
            let v = record.value_for(&f.def)?;
            feature_likelihood(&f.def.id, v, &f.model, grade)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: [f64; 5]) -> GradeMap<f64> {
        GradeMap::new(v)
    }

    #[test]
    fn gaussian_pdf_examples() {
        assert!((gaussian_pdf(80.0, 80.0, 5.0).unwrap() - 0.079_788_5).abs() < 1e-7);
        assert!((gaussian_pdf(82.0, 80.0, 5.0).unwrap() - 0.073_654_1).abs() < 1e-7);
        assert!((gaussian_pdf(82.0, 90.0, 5.0).unwrap() - 0.022_184_2).abs() < 1e-7);
        assert_eq!(gaussian_pdf(1.0, 0.0, 0.0), Err(Error::NonPositiveSigma(0.0)));
        assert!(gaussian_pdf(1.0, 0.0, -2.0).is_err());
        // Density, not probability: narrow sigma exceeds one.
        assert!(gaussian_pdf(0.0, 0.0, 0.1).unwrap() > 1.0);
    }

    #[test]
    fn table_lookup_examples() {
        let f2 = BinTable::new(
            "F2",
            vec![Bin {
                lo: 0.0,
                hi: 10.0,
                probs: row([0.8, 0.6, 0.4, 0.2, 0.1]),
            }],
        )
        .unwrap();
        assert_eq!(table_lookup("F2", 7.0, &f2).unwrap(), &row([0.8, 0.6, 0.4, 0.2, 0.1]));

        let f5 = BinTable::new(
            "F5",
            vec![Bin {
                lo: 0.0,
                hi: 100.0,
                probs: row([0.6, 0.8, 0.7, 0.5, 0.3]),
            }],
        )
        .unwrap();
        assert_eq!(table_lookup("F5", 12.0, &f5).unwrap()[Grade::B], 0.8);
        // Last bin is closed at hi.
        assert!(table_lookup("F5", 100.0, &f5).is_ok());
        assert_eq!(
            table_lookup("F5", -1.0, &f5).unwrap_err(),
            Error::OutOfRange {
                feature: "F5".into(),
                value: -1.0
            }
        );
    }

    #[test]
    fn interior_bin_edges_are_half_open() {
        let t = BinTable::new(
            "F",
            vec![
                Bin { lo: 0.0, hi: 5.0, probs: row([1.0; 5]) },
                Bin { lo: 5.0, hi: 10.0, probs: row([0.5; 5]) },
            ],
        )
        .unwrap();
        assert_eq!(t.bin_for(5.0).unwrap().lo, 5.0);
        assert_eq!(t.bin_for(4.999).unwrap().lo, 0.0);
        assert!(t.bin_for(10.000_001).is_none());
    }

    #[test]
    fn overlapping_bins_are_rejected() {
        let err = BinTable::new(
            "F2",
            vec![
                Bin { lo: 0.0, hi: 10.0, probs: row([0.5; 5]) },
                Bin { lo: 5.0, hi: 15.0, probs: row([0.5; 5]) },
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::OverlappingBins { ref feature, .. } if feature == "F2"));
        assert!(err.to_string().contains("overlap"));
    }

    #[test]
    fn table_rejects_bad_bins() {
        assert!(BinTable::new("F", vec![]).is_err());
        assert!(BinTable::new("F", vec![Bin { lo: 1.0, hi: 1.0, probs: row([0.5; 5]) }]).is_err());
        assert!(BinTable::new("F", vec![Bin { lo: 0.0, hi: 1.0, probs: row([1.5; 5]) }]).is_err());
    }

    #[test]
    fn model_form_must_match_kind() {
        let def = FeatureDef {
            id: "F1".into(),
            name: "load".into(),
            unit: "%".into(),
            kind: FeatureKind::BoundedTable,
        };
        let gauss = LikelihoodModel::Gaussian(GradeMap::from_fn(|_| GaussianParams { mu: 1.0, sigma: 1.0 }));
        assert!(gauss.validate(&def).is_err());
        let def = FeatureDef {
            kind: FeatureKind::Continuous,
            ..def
        };
        assert!(gauss.validate(&def).is_ok());
        let bad = LikelihoodModel::Gaussian(GradeMap::from_fn(|_| GaussianParams { mu: 1.0, sigma: 0.0 }));
        assert!(bad.validate(&def).is_err());
    }

    #[test]
    fn feature_likelihood_dispatches() {
        let gauss = LikelihoodModel::Gaussian(GradeMap::from_fn(|_| GaussianParams { mu: 80.0, sigma: 5.0 }));
        let v = feature_likelihood("F1", 80.0, &gauss, Grade::B).unwrap();
        assert!((v - 0.079_788_5).abs() < 1e-7);
    }
}
