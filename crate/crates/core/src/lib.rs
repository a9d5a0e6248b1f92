//! Grading and circular-intervention classification for end-of-life
//! modular construction components.
//!
//! A component's observed features are graded A (best) to E (worst) under a
//! named usage scenario by a naive Bayes classifier whose priors and
//! likelihoods are scenario-specific. Grades then map to circular
//! interventions (reuse, upcycle, downcycle), and the results can be exported
//! as decision trees, Sankey flows and confusion matrices.

pub mod classifier;
pub mod config;
pub mod domain;
pub mod dtree;
pub mod error;
pub mod format;
pub mod intervention;
pub mod likelihood;
pub mod reporting;

pub use classifier::{
    check_thresholds, classify, classify_all, evidence, joint_likelihood, posterior,
    posterior_terms, ClassificationResult, ThresholdStatus,
};
pub use config::{load_component, load_config, load_scenario_config, ScenarioConfig};
pub use domain::{
    compare_grades, parse_grade, Comparison, ComponentRecord, FeatureDef, FeatureKind, Grade,
    GradeDistribution, GradeMap, ScenarioFeature, ScenarioSpec, Threshold,
};
pub use dtree::{
    export_tree_dot, predict_tree, sample_components, train_tree, LabeledDataset, TreeNode,
    TreeParams,
};
pub use error::{Error, Result};
pub use intervention::{decide, InterventionClass, InterventionDecision, UsagePath};
pub use likelihood::{
    feature_likelihood, gaussian_pdf, likelihood_vector, table_lookup, Bin, BinTable,
    GaussianParams, LikelihoodModel,
};
pub use reporting::{comparison_table, confusion_matrix, sankey_flows, ConfusionMatrix, SankeyFlow};
