//! Core vocabulary: grades, features, scenarios, component records and
//! grade distributions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::likelihood::LikelihoodModel;

/// Tolerance on the sum of configured priors.
pub const PRIOR_SUM_TOLERANCE: f64 = 1e-6;

/// Five-level condition grade. `A` is best, `E` is worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grade {
    A,
    B,
    C,
    D,
    E,
}

impl Grade {
    /// All grades, best first.
    pub const ALL: [Grade; 5] = [Grade::A, Grade::B, Grade::C, Grade::D, Grade::E];

    /// Rank in `0..5`; lower is better.
    pub fn rank(self) -> usize {
        self as usize
    }

    pub fn from_rank(rank: usize) -> Option<Grade> {
        Self::ALL.get(rank).copied()
    }

    pub fn label(self) -> char {
        (b'A' + self as u8) as char
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl FromStr for Grade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_grade(s)
    }
}

/// Case-insensitive grade parser. Surrounding whitespace is ignored.
pub fn parse_grade(text: &str) -> Result<Grade> {
    match text.trim().to_ascii_uppercase().as_str() {
        "A" => Ok(Grade::A),
        "B" => Ok(Grade::B),
        "C" => Ok(Grade::C),
        "D" => Ok(Grade::D),
        "E" => Ok(Grade::E),
        _ => Err(Error::ParseGrade(text.to_string())),
    }
}

/// Quality comparison between two grades.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Better,
    Equal,
    Worse,
}

/// Compares `a` against `b`: `Better` when `a` has the lower rank.
pub fn compare_grades(a: Grade, b: Grade) -> Comparison {
    match a.rank().cmp(&b.rank()) {
        Ordering::Less => Comparison::Better,
        Ordering::Equal => Comparison::Equal,
        Ordering::Greater => Comparison::Worse,
    }
}

impl Serialize for Grade {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_char(self.label())
    }
}

impl<'de> Deserialize<'de> for Grade {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_grade(&s).map_err(serde::de::Error::custom)
    }
}

/// Total map from every grade to a value. Serialized as `{"A": .., "E": ..}`
/// with all five keys required.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct GradeMap<T>([T; 5]);

impl<T> GradeMap<T> {
    pub fn new(values: [T; 5]) -> Self {
        GradeMap(values)
    }

    pub fn from_fn(mut f: impl FnMut(Grade) -> T) -> Self {
        GradeMap(Grade::ALL.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Grade, &T)> {
        Grade::ALL.into_iter().zip(self.0.iter())
    }

    pub fn values(&self) -> &[T; 5] {
        &self.0
    }

    pub fn map<U>(&self, mut f: impl FnMut(Grade, &T) -> U) -> GradeMap<U> {
        GradeMap::from_fn(|g| f(g, &self.0[g.rank()]))
    }

    pub fn try_map<U, E>(
        &self,
        mut f: impl FnMut(Grade, &T) -> std::result::Result<U, E>,
    ) -> std::result::Result<GradeMap<U>, E> {
        let mut out = Vec::with_capacity(5);
        for (g, v) in self.iter() {
            out.push(f(g, v)?);
        }
        match <[U; 5]>::try_from(out) {
            Ok(arr) => Ok(GradeMap(arr)),
            Err(_) => unreachable!("five grades"),
        }
    }
}

impl<T> Index<Grade> for GradeMap<T> {
    type Output = T;
    fn index(&self, g: Grade) -> &T {
        &self.0[g.rank()]
    }
}

impl<T> IndexMut<Grade> for GradeMap<T> {
    fn index_mut(&mut self, g: Grade) -> &mut T {
        &mut self.0[g.rank()]
    }
}

impl<T: Serialize> Serialize for GradeMap<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(5))?;
        for (g, v) in self.iter() {
            m.serialize_entry(&g.label().to_string(), v)?;
        }
        m.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for GradeMap<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = BTreeMap::<String, T>::deserialize(d)?;
        let mut slots: [Option<T>; 5] = Default::default();
        for (k, v) in raw {
            let g = parse_grade(&k).map_err(D::Error::custom)?;
            if slots[g.rank()].replace(v).is_some() {
                return Err(D::Error::custom(format!("duplicate grade key {k:?}")));
            }
        }
        let mut out = Vec::with_capacity(5);
        for (g, slot) in Grade::ALL.iter().zip(slots) {
            out.push(slot.ok_or_else(|| D::Error::custom(format!("missing grade {g}")))?);
        }
        match <[T; 5]>::try_from(out) {
            Ok(arr) => Ok(GradeMap(arr)),
            Err(_) => unreachable!("five grades"),
        }
    }
}

/// How a feature's likelihood is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    BoundedTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub id: String,
    pub name: String,
    pub unit: String,
    pub kind: FeatureKind,
}

impl FeatureDef {
    /// Percentage features must carry values in `[0, 100]`.
    pub fn is_percentage(&self) -> bool {
        self.unit.trim() == "%"
    }
}

/// Inclusive acceptance bounds for one feature.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Threshold {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl Threshold {
    pub fn admits(&self, value: f64) -> bool {
        self.min.is_none_or(|m| m <= value) && self.max.is_none_or(|m| value <= m)
    }
}

/// A scenario feature with its likelihood model and optional threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFeature {
    pub def: FeatureDef,
    pub model: LikelihoodModel,
    pub threshold: Option<Threshold>,
}

/// A validated usage scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    id: String,
    label: String,
    priors: GradeMap<f64>,
    features: Vec<ScenarioFeature>,
}

impl ScenarioSpec {
    pub fn new(
        id: impl Into<String>,
        label: impl Into<String>,
        priors: GradeMap<f64>,
        features: Vec<ScenarioFeature>,
    ) -> Result<Self> {
        let id = id.into();
        for (g, &p) in priors.iter() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::PriorRange {
                    scenario: id,
                    grade: g.label(),
                    value: p,
                });
            }
        }
        let sum: f64 = priors.values().iter().sum();
        if (sum - 1.0).abs() > PRIOR_SUM_TOLERANCE {
            return Err(Error::PriorSum { scenario: id, sum });
        }
        let mut seen = BTreeSet::new();
        for f in &features {
            if !seen.insert(f.def.id.as_str()) {
                return Err(Error::DuplicateFeature {
                    scenario: id.clone(),
                    feature: f.def.id.clone(),
                });
            }
            f.model.validate(&f.def)?;
            if let Some(t) = &f.threshold {
                for bound in [t.min, t.max].into_iter().flatten() {
                    if !bound.is_finite() {
                        return Err(Error::NonFinite {
                            what: format!("threshold of {}", f.def.id),
                            value: bound,
                        });
                    }
                }
                if let (Some(lo), Some(hi)) = (t.min, t.max) {
                    if lo > hi {
                        return Err(Error::InvalidModel {
                            feature: f.def.id.clone(),
                            message: format!("threshold min {lo} exceeds max {hi}"),
                        });
                    }
                }
            }
        }
        Ok(ScenarioSpec {
            id,
            label: label.into(),
            priors,
            features,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn priors(&self) -> &GradeMap<f64> {
        &self.priors
    }

    pub fn features(&self) -> &[ScenarioFeature] {
        &self.features
    }

    pub fn feature(&self, id: &str) -> Option<&ScenarioFeature> {
        self.features.iter().find(|f| f.def.id == id)
    }

    /// Thresholded features in scenario order.
    pub fn thresholds(&self) -> impl Iterator<Item = (&str, &Threshold)> {
        self.features
            .iter()
            .filter_map(|f| f.threshold.as_ref().map(|t| (f.def.id.as_str(), t)))
    }

    /// Same scenario with its features reordered by `order` (a permutation
    /// of feature indices).
    pub fn with_feature_order(&self, order: &[usize]) -> Self {
        let features = order.iter().map(|&i| self.features[i].clone()).collect();
        ScenarioSpec {
            features,
            ..self.clone()
        }
    }
}

/// Observed feature values for one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub component_id: String,
    pub values: BTreeMap<String, f64>,
}

impl ComponentRecord {
    /// Builds a record, rejecting non-finite values.
    pub fn new(
        component_id: impl Into<String>,
        values: impl IntoIterator<Item = (String, f64)>,
    ) -> Result<Self> {
        let values: BTreeMap<String, f64> = values.into_iter().collect();
        for (k, v) in &values {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("feature {k}"),
                    value: *v,
                });
            }
        }
        Ok(ComponentRecord {
            component_id: component_id.into(),
            values,
        })
    }

    pub fn get(&self, feature: &str) -> Option<f64> {
        self.values.get(feature).copied()
    }

    /// Looks up a value for `def`, enforcing the percentage range.
    pub fn value_for(&self, def: &FeatureDef) -> Result<f64> {
        let v = self
            .get(&def.id)
            .ok_or_else(|| Error::MissingFeature(def.id.clone()))?;
        if def.is_percentage() && !(0.0..=100.0).contains(&v) {
            return Err(Error::PercentageRange {
                feature: def.id.clone(),
                value: v,
            });
        }
        Ok(v)
    }
}

/// Normalized probability mass over the five grades.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GradeDistribution {
    probs: GradeMap<f64>,
}

impl GradeDistribution {
    /// Normalizes non-negative weights. All-zero input is rejected.
    pub fn from_weights(weights: GradeMap<f64>) -> Result<Self> {
        for (g, &w) in weights.iter() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::NegativeInput {
                    what: format!("weight for grade {g}"),
                    value: w,
                });
            }
        }
        let total: f64 = weights.values().iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(GradeDistribution {
            probs: weights.map(|_, &w| w / total),
        })
    }

    pub fn get(&self, g: Grade) -> f64 {
        self.probs[g]
    }

    pub fn probs(&self) -> &GradeMap<f64> {
        &self.probs
    }

    /// Most probable grade; ties go to the worse grade.
    pub fn argmax(&self) -> Grade {
        argmax_worse_on_tie(&self.probs)
    }
}

/// Index of the largest value; equal values resolve to the worse grade.
pub(crate) fn argmax_worse_on_tie(values: &GradeMap<f64>) -> Grade {
    let mut best = Grade::A;
    for (g, &v) in values.iter() {
        if v >= values[best] {
            best = g;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_grade_examples() {
        assert_eq!(parse_grade("B").unwrap(), Grade::B);
        assert_eq!(parse_grade("e").unwrap(), Grade::E);
        let err = parse_grade("F").unwrap_err();
        assert!(err.to_string().contains("\"F\""), "{err}");
    }

    #[test]
    fn compare_grades_examples() {
        assert_eq!(compare_grades(Grade::A, Grade::B), Comparison::Better);
        assert_eq!(compare_grades(Grade::C, Grade::C), Comparison::Equal);
        assert_eq!(compare_grades(Grade::E, Grade::D), Comparison::Worse);
    }

    #[test]
    fn grade_round_trips_through_text() {
        for g in Grade::ALL {
            assert_eq!(parse_grade(&g.to_string()).unwrap(), g);
            assert_eq!(Grade::from_rank(g.rank()), Some(g));
        }
    }

    #[test]
    fn compare_is_a_total_order() {
        for a in Grade::ALL {
            for b in Grade::ALL {
                let ab = compare_grades(a, b);
                let ba = compare_grades(b, a);
                match ab {
                    Comparison::Better => assert_eq!(ba, Comparison::Worse),
                    Comparison::Worse => assert_eq!(ba, Comparison::Better),
                    Comparison::Equal => assert_eq!(a, b),
                }
                for c in Grade::ALL {
                    if ab == Comparison::Better && compare_grades(b, c) == Comparison::Better {
                        assert_eq!(compare_grades(a, c), Comparison::Better);
                    }
                }
            }
        }
    }

    #[test]
    fn grade_map_serde_requires_all_keys() {
        let m: GradeMap<f64> =
            serde_json::from_str(r#"{"A":0.1,"b":0.2,"C":0.3,"D":0.2,"E":0.2}"#).unwrap();
        assert_eq!(m[Grade::B], 0.2);
        let missing = serde_json::from_str::<GradeMap<f64>>(r#"{"A":1}"#);
        assert!(missing.unwrap_err().to_string().contains("missing grade B"));
        assert_eq!(
            serde_json::to_string(&GradeMap::new([1, 2, 3, 4, 5])).unwrap(),
            r#"{"A":1,"B":2,"C":3,"D":4,"E":5}"#
        );
    }

    #[test]
    fn distribution_normalizes_and_rejects_zero() {
        let d = GradeDistribution::from_weights(GradeMap::new([1.0, 1.0, 2.0, 0.0, 0.0])).unwrap();
        assert_eq!(d.get(Grade::C), 0.5);
        let sum: f64 = d.probs().values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert_eq!(
            GradeDistribution::from_weights(GradeMap::default()).unwrap_err(),
            Error::ZeroMass
        );
        assert!(GradeDistribution::from_weights(GradeMap::new([1.0, -0.1, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn argmax_ties_go_to_worse_grade() {
        let d = GradeDistribution::from_weights(GradeMap::new([0.4, 0.4, 0.2, 0.0, 0.0])).unwrap();
        assert_eq!(d.argmax(), Grade::B);
    }

    #[test]
    fn record_rejects_non_finite() {
        assert!(ComponentRecord::new("x", [("F1".to_string(), f64::NAN)]).is_err());
    }

    #[test]
    fn percentage_values_are_range_checked() {
        let def = FeatureDef {
            id: "F1".into(),
            name: "load".into(),
            unit: "%".into(),
            kind: FeatureKind::Continuous,
        };
        let rec = ComponentRecord::new("x", [("F1".to_string(), 101.0)]).unwrap();
        assert!(matches!(rec.value_for(&def), Err(Error::PercentageRange { .. })));
        let rec = ComponentRecord::new("x", [("F2".to_string(), 1.0)]).unwrap();
        assert_eq!(rec.value_for(&def), Err(Error::MissingFeature("F1".into())));
    }

    #[test]
    fn threshold_bounds_are_inclusive() {
        let t = Threshold {
            min: Some(75.0),
            max: Some(100.0),
        };
        assert!(t.admits(75.0));
        assert!(t.admits(100.0));
        assert!(!t.admits(74.9));
        assert!(Threshold::default().admits(-1e9));
    }
}
