use thiserror::Error;

use crate::format::sig;

/// Errors raised anywhere in the grading pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown grade label {0:?} (expected one of A, B, C, D, E)")]
    ParseGrade(String),

    #[error("gaussian sigma must be > 0, got {0}")]
    NonPositiveSigma(f64),

    #[error("non-finite value {value} for {what}")]
    NonFinite { what: String, value: f64 },

    #[error("value {value} for feature {feature} lies outside every likelihood bin")]
    OutOfRange { feature: String, value: f64 },

    #[error("value {value} for percentage feature {feature} lies outside [0, 100]")]
    PercentageRange { feature: String, value: f64 },

    #[error("missing feature {0}")]
    MissingFeature(String),

    #[error("joint likelihood needs at least one factor")]
    EmptyLikelihoods,

    #[error("negative or non-finite {what}: {value}")]
    NegativeInput { what: String, value: f64 },

    #[error("no grade supported by observations (evidence is zero)")]
    ZeroEvidence,

    #[error("grade distribution needs positive total mass")]
    ZeroMass,

    #[error("scenario {scenario}: priors sum {} (expected 1)", sig(*.sum, 6))]
    PriorSum { scenario: String, sum: f64 },

    #[error("scenario {scenario}: prior for grade {grade} is {value}, outside [0, 1]")]
    PriorRange {
        scenario: String,
        grade: char,
        value: f64,
    },

    #[error("feature {feature}: {message}")]
    InvalidModel { feature: String, message: String },

    #[error("feature {feature}: bins [{a_lo}, {a_hi}) and [{b_lo}, {b_hi}) overlap")]
    OverlappingBins {
        feature: String,
        a_lo: f64,
        a_hi: f64,
        b_lo: f64,
        b_hi: f64,
    },

    #[error("scenario {scenario}: duplicate feature id {feature}")]
    DuplicateFeature { scenario: String, feature: String },

    #[error("duplicate scenario id {0}")]
    DuplicateScenario(String),

    #[error("unknown scenario {0}")]
    UnknownScenario(String),

    #[error("invalid offset {0} (expected 1 or 2)")]
    InvalidOffset(i64),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid tree parameters: {0}")]
    TreeParams(String),

    #[error("scenario weights: {0}")]
    Weights(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("feature {feature}: cannot parse {text:?} as a number")]
    NonNumeric { feature: String, text: String },
}

pub type Result<T> = std::result::Result<T, Error>;
