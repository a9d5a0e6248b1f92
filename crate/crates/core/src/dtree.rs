//! Threshold-split decision trees over component features, plus a seeded
//! sampler that draws labelled components from a scenario's generative model.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::domain::{argmax_worse_on_tie, ComponentRecord, Grade, GradeMap, ScenarioSpec};
use crate::error::{Error, Result};
use crate::format::sig;
use crate::likelihood::LikelihoodModel;

/// Generator used by [`sample_components`]; recorded in sample metadata.
pub const SAMPLER_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64";

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    records: Vec<ComponentRecord>,
    labels: Vec<Grade>,
}

impl LabeledDataset {
    pub fn new(records: Vec<ComponentRecord>, labels: Vec<Grade>) -> Result<Self> {
        if records.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: records.len(),
                right: labels.len(),
            });
        }
        Ok(LabeledDataset { records, labels })
    }

    pub fn records(&self) -> &[ComponentRecord] {
        &self.records
    }

    pub fn labels(&self) -> &[Grade] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Feature ids present in every record, sorted.
    pub fn feature_ids(&self) -> Vec<String> {
        let mut iter = self.records.iter();
        let Some(first) = iter.next() else {
            return Vec::new();
        };
        let mut ids: BTreeSet<&String> = first.values.keys().collect();
        for r in iter {
            ids.retain(|k| r.values.contains_key(*k));
        }
        ids.into_iter().cloned().collect()
    }
}

/// Draws `n` labelled components: grade from the scenario priors, then each
/// feature from that grade's model. Gaussian features are sampled directly
/// (percentage features are clamped to [0, 100]). Table features pick a bin
/// with probability proportional to `likelihood × width`, then a uniform
/// value inside it; a grade with zero mass over the whole table falls back to
/// width-proportional bins.
pub fn sample_components(scenario: &ScenarioSpec, n: usize, seed: u64) -> Result<LabeledDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grade_dist = WeightedIndex::new(scenario.priors().values())
        .map_err(|e| Error::Parse(format!("scenario {}: priors not sampleable: {e}", scenario.id())))?;

    let mut records = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let grade = Grade::ALL[grade_dist.sample(&mut rng)];
        let mut values = Vec::with_capacity(scenario.features().len());
        for f in scenario.features() {
            let v = match &f.model {
                LikelihoodModel::Gaussian(params) => {
                    let p = params[grade];
                    let normal = Normal::new(p.mu, p.sigma).map_err(|e| Error::InvalidModel {
                        feature: f.def.id.clone(),
                        message: e.to_string(),
                    })?;
                    let x = normal.sample(&mut rng);
                    if f.def.is_percentage() {
                        x.clamp(0.0, 100.0)
                    } else {
                        x
                    }
                }
                LikelihoodModel::Table(table) => {
                    let mass: Vec<f64> = table.bins.iter().map(|b| b.probs[grade] * b.width()).collect();
                    let weights = if mass.iter().any(|&m| m > 0.0) {
                        mass
                    } else {
                        table.bins.iter().map(|b| b.width()).collect()
                    };
                    let pick = WeightedIndex::new(&weights).map_err(|e| Error::InvalidModel {
                        feature: f.def.id.clone(),
                        message: e.to_string(),
                    })?;
                    let bin = &table.bins[pick.sample(&mut rng)];
                    rng.random_range(bin.lo..bin.hi)
                }
            };
            values.push((f.def.id.clone(), v));
        }
        records.push(ComponentRecord::new(format!("S{:05}", i + 1), values)?);
        labels.push(grade);
    }
    LabeledDataset::new(records, labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 4,
            min_leaf: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    /// Records with `value < threshold` go left.
    Split {
        feature_id: String,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        grade: Grade,
        #[serde(rename = "counts")]
        class_counts: GradeMap<usize>,
    },
}

impl TreeNode {
    pub fn leaf(class_counts: GradeMap<usize>) -> Self {
        let as_f64 = class_counts.map(|_, &c| c as f64);
        TreeNode::Leaf {
            grade: argmax_worse_on_tie(&as_f64),
            class_counts,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }
}

fn counts_of(labels: impl Iterator<Item = Grade>) -> [usize; 5] {
    let mut c = [0usize; 5];
    for g in labels {
        c[g.rank()] += 1;
    }
    c
}

fn sum_sq(c: &[usize; 5]) -> u128 {
    c.iter().map(|&x| (x as u128) * (x as u128)).sum()
}

/// Split purity score `Σc_l²/n_l + Σc_r²/n_r` as an exact fraction.
/// Weighted child Gini is `1 - score/n`, so a larger score is a better split.
#[derive(Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn split(left: &[usize; 5], n_left: usize, right: &[usize; 5], n_right: usize) -> Self {
        let (nl, nr) = (n_left as u128, n_right as u128);
        Score {
            num: sum_sq(left) * nr + sum_sq(right) * nl,
            den: nl * nr,
        }
    }

    fn whole(c: &[usize; 5], n: usize) -> Self {
        Score {
            num: sum_sq(c),
            den: n as u128,
        }
    }

    fn cmp(&self, other: &Score) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: Score,
}

/// Greedy CART induction with Gini impurity. Candidate thresholds are the
/// midpoints between consecutive distinct values; ties keep the first
/// candidate in (feature id, threshold) order. A node becomes a leaf when it
/// is pure, at `max_depth`, or when no split with `min_leaf` records per side
/// lowers impurity.
pub fn train_tree(data: &LabeledDataset, params: TreeParams) -> Result<TreeNode> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if params.min_leaf == 0 {
        return Err(Error::TreeParams("min_leaf must be at least 1".into()));
    }
    let features = data.feature_ids();
    let columns: Vec<Vec<f64>> = features
        .iter()
        .map(|f| data.records.iter().map(|r| r.values[f]).collect())
        .collect();
    let builder = Builder {
        features: &features,
        columns: &columns,
        labels: &data.labels,
        params,
    };
    Ok(builder.build((0..data.len()).collect(), 0))
}

struct Builder<'a> {
    features: &'a [String],
    columns: &'a [Vec<f64>],
    labels: &'a [Grade],
    params: TreeParams,
}

impl Builder<'_> {
    fn build(&self, idx: Vec<usize>, depth: usize) -> TreeNode {
        let counts = counts_of(idx.iter().map(|&i| self.labels[i]));
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.params.max_depth || idx.len() < 2 * self.params.min_leaf {
            return TreeNode::leaf(GradeMap::new(counts));
        }
        let Some(best) = self.best_split(&idx, &counts) else {
            return TreeNode::leaf(GradeMap::new(counts));
        };
        let column = &self.columns[best.feature];
        let (left, right): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| column[i] < best.threshold);
        TreeNode::Split {
            feature_id: self.features[best.feature].clone(),
            threshold: best.threshold,
            left: Box::new(self.build(left, depth + 1)),
            right: Box::new(self.build(right, depth + 1)),
        }
    }

    fn best_split(&self, idx: &[usize], counts: &[usize; 5]) -> Option<Candidate> {
        let n = idx.len();
        let min_leaf = self.params.min_leaf;
        let parent = Score::whole(counts, n);
        let mut best: Option<Candidate> = None;
        for (fi, column) in self.columns.iter().enumerate() {
            let mut sorted: Vec<(f64, Grade)> = idx.iter().map(|&i| (column[i], self.labels[i])).collect();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = [0usize; 5];
            let mut right = *counts;
            for i in 1..n {
                let g = sorted[i - 1].1.rank();
                left[g] += 1;
                right[g] -= 1;
                let (lo, hi) = (sorted[i - 1].0, sorted[i].0);
                if lo >= hi || i < min_leaf || n - i < min_leaf {
                    continue;
                }
                let score = Score::split(&left, i, &right, n - i);
                if score.cmp(&parent) != Ordering::Greater {
                    continue;
                }
                if best.as_ref().is_none_or(|b| score.cmp(&b.score) == Ordering::Greater) {
                    best = Some(Candidate {
                        feature: fi,
                        threshold: midpoint(lo, hi),
                        score,
                    });
                }
            }
        }
        best
    }
}

/// Midpoint strictly above `lo` and at most `hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m > lo {
        m
    } else {
        hi
    }
}

/// Gini impurity of a label multiset.
pub fn gini(counts: &GradeMap<usize>) -> f64 {
    let n: usize = counts.values().iter().sum();
    if n == 0 {
        return 0.0;
    }
    1.0 - counts
        .values()
        .iter()
        .map(|&c| (c as f64 / n as f64).powi(2))
        .sum::<f64>()
}

pub fn predict_tree(tree: &TreeNode, record: &ComponentRecord) -> Result<Grade> {
    let mut node = tree;
    loop {
        match node {
            TreeNode::Leaf { grade, .. } => return Ok(*grade),
            TreeNode::Split {
                feature_id,
                threshold,
                left,
                right,
            } => {
                let v = record
                    .get(feature_id)
                    .ok_or_else(|| Error::MissingFeature(feature_id.clone()))?;
                node = if v < *threshold { left } else { right };
            }
        }
    }
}

/// Fraction of records whose prediction matches their label.
pub fn accuracy(tree: &TreeNode, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut hits = 0usize;
    for (r, &l) in data.records.iter().zip(&data.labels) {
        if predict_tree(tree, r)? == l {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Graphviz rendering: split nodes read `F < t`, the left edge is "yes".
pub fn export_tree_dot(tree: &TreeNode) -> String {
    let mut out = String::from("digraph tree {\n  node [shape=box, fontname=\"Helvetica\"];\n");
    let mut next = 0usize;
    write_dot(tree, &mut next, &mut out);
    out.push_str("}\n");
    out
}

fn write_dot(node: &TreeNode, next: &mut usize, out: &mut String) -> usize {
    let id = *next;
    *next += 1;
    match node {
        TreeNode::Leaf { grade, class_counts } => {
            let counts: Vec<String> = class_counts.iter().map(|(g, c)| format!("{g}={c}")).collect();
            let _ = writeln!(
                out,
                "  n{id} [label=\"grade {grade}\\n{}\", style=rounded];",
                counts.join(" ")
            );
        }
        TreeNode::Split {
            feature_id,
            threshold,
            left,
            right,
        } => {
            let _ = writeln!(
                out,
                "  n{id} [label=\"{} < {}\"];",
                escape(feature_id),
                sig(*threshold, 6)
            );
            let l = write_dot(left, next, out);
            let _ = writeln!(out, "  n{id} -> n{l} [label=\"yes\"];");
            let r = write_dot(right, next, out);
            let _ = writeln!(out, "  n{id} -> n{r} [label=\"no\"];");
        }
    }
    id
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(f1: f64) -> ComponentRecord {
        ComponentRecord::new("r", [("F1".to_string(), f1)]).unwrap()
    }

    fn two_point() -> LabeledDataset {
        LabeledDataset::new(vec![rec(60.0), rec(90.0)], vec![Grade::E, Grade::A]).unwrap()
    }

    fn threshold_tree() -> TreeNode {
        TreeNode::Split {
            feature_id: "F1".into(),
            threshold: 75.0,
            left: Box::new(TreeNode::leaf(GradeMap::new([0, 0, 0, 0, 1]))),
            right: Box::new(TreeNode::leaf(GradeMap::new([1, 0, 0, 0, 0]))),
        }
    }

    #[test]
    fn single_label_yields_single_leaf() {
        let data = LabeledDataset::new(vec![rec(1.0), rec(2.0), rec(3.0)], vec![Grade::C; 3]).unwrap();
        let t = train_tree(&data, TreeParams { max_depth: 4, min_leaf: 1 }).unwrap();
        assert!(matches!(t, TreeNode::Leaf { grade: Grade::C, .. }));
    }

    #[test]
    fn two_point_split_at_midpoint() {
        let t = train_tree(&two_point(), TreeParams { max_depth: 3, min_leaf: 1 }).unwrap();
        assert_eq!(t, threshold_tree());
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let data = LabeledDataset::new(vec![], vec![]).unwrap();
        assert_eq!(train_tree(&data, TreeParams::default()), Err(Error::EmptyDataset));
        assert!(LabeledDataset::new(vec![rec(1.0)], vec![]).is_err());
    }

    #[test]
    fn predict_examples() {
        let leaf = TreeNode::leaf(GradeMap::new([0, 3, 1, 0, 0]));
        assert_eq!(predict_tree(&leaf, &rec(0.0)).unwrap(), Grade::B);
        let t = threshold_tree();
        assert_eq!(predict_tree(&t, &rec(82.0)).unwrap(), Grade::A);
        assert_eq!(predict_tree(&t, &rec(74.9)).unwrap(), Grade::E);
        let other = ComponentRecord::new("r", [("F2".to_string(), 1.0)]).unwrap();
        assert_eq!(predict_tree(&t, &other), Err(Error::MissingFeature("F1".into())));
    }

    #[test]
    fn leaf_majority_ties_go_to_worse_grade() {
        let leaf = TreeNode::leaf(GradeMap::new([2, 0, 2, 0, 0]));
        assert!(matches!(leaf, TreeNode::Leaf { grade: Grade::C, .. }));
    }

    #[test]
    fn dot_export_structure() {
        let leaf = export_tree_dot(&TreeNode::leaf(GradeMap::new([0, 0, 4, 0, 0])));
        assert!(leaf.contains("grade C"));
        assert_eq!(leaf.matches("[label=").count(), 1);
        let dot = export_tree_dot(&threshold_tree());
        assert_eq!(dot.matches(" -> ").count(), 2);
        assert!(dot.contains("n0 [label=\"F1 < 75\"]"));
        assert!(dot.contains("[label=\"yes\"]") && dot.contains("[label=\"no\"]"));
        assert_eq!(dot, export_tree_dot(&threshold_tree()));
    }

    #[test]
    fn tree_json_shape() {
        let json = serde_json::to_string(&threshold_tree()).unwrap();
        assert!(json.starts_with(r#"{"kind":"split","feature_id":"F1","threshold":75.0"#), "{json}");
        assert!(json.contains(r#""kind":"leaf","grade":"E","counts":{"A":0"#));
        let back: TreeNode = serde_json::from_str(&json).unwrap();
        assert_eq!(back, threshold_tree());
    }

    #[test]
    fn min_leaf_blocks_small_children() {
        let data = LabeledDataset::new(
            vec![rec(1.0), rec(2.0), rec(3.0), rec(4.0)],
            vec![Grade::A, Grade::B, Grade::B, Grade::B],
        )
        .unwrap();
        let t = train_tree(&data, TreeParams { max_depth: 5, min_leaf: 2 }).unwrap();
        match t {
            TreeNode::Split { threshold, .. } => assert_eq!(threshold, 2.5),
            other => panic!("expected split, got {other:?}"),
        }
        assert!(train_tree(&data, TreeParams { max_depth: 5, min_leaf: 0 }).is_err());
        let t = train_tree(&data, TreeParams { max_depth: 0, min_leaf: 1 }).unwrap();
        assert!(matches!(t, TreeNode::Leaf { grade: Grade::B, .. }));
    }

    #[test]
    fn midpoint_stays_above_lower_value() {
        let lo = 1.0_f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let m = midpoint(lo, hi);
        assert!(m > lo && m <= hi);
        assert_eq!(midpoint(60.0, 90.0), 75.0);
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&GradeMap::new([4, 0, 0, 0, 0])), 0.0);
        assert!((gini(&GradeMap::new([1, 1, 0, 0, 0])) - 0.5).abs() < 1e-15);
    }
}
