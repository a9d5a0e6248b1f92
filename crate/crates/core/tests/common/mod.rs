//! Test-only helpers: fixtures and an exact-arithmetic Bayes oracle.
#![allow(dead_code)]

pub mod dot;

use mgcs_core::{load_component, load_config, ComponentRecord, ScenarioConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub const CASE_STUDY: &str = include_str!("../../fixtures/case_study.json");
pub const U1_GENERATIVE: &str = include_str!("../../fixtures/u1_generative.json");
pub const RECORD_JSON: &str = include_str!("../../fixtures/wall_panel.json");
pub const RECORD_CSV: &str = include_str!("../../fixtures/wall_panel.csv");

pub fn case_study() -> ScenarioConfig {
    load_config(CASE_STUDY).expect("case study config loads")
}

pub fn generative() -> ScenarioConfig {
    load_config(U1_GENERATIVE).expect("generative config loads")
}

pub fn wall_panel() -> ComponentRecord {
    load_component(RECORD_JSON).expect("reference record loads")
}

/// Exact rational for a decimal literal such as "0.0304".
pub fn dec(text: &str) -> BigRational {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("decimal digits");
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    BigRational::new(digits, scale)
}

/// Exact rational value of an f64.
pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("representable")
}

/// Exact joints, evidence and posterior for per-grade likelihood rows.
pub struct ExactBayes {
    pub joints: Vec<BigRational>,
    pub evidence: BigRational,
    pub posterior: Vec<BigRational>,
}

/// Enumerates grades and forms products and weighted sums exactly. Fractions
/// are kept unreduced (gcd dominates the cost otherwise); equality and
/// `to_f64` do not need lowest terms.
pub fn exact_bayes(likelihoods: &[Vec<BigRational>], priors: &[BigRational]) -> ExactBayes {
    assert_eq!(likelihoods.len(), 5);
    assert_eq!(priors.len(), 5);
    let mul = |(n, d): (BigInt, BigInt), x: &BigRational| (n * x.numer(), d * x.denom());
    let joints: Vec<(BigInt, BigInt)> = likelihoods
        .iter()
        .map(|row| row.iter().fold((BigInt::one(), BigInt::one()), mul))
        .collect();
    let weighted: Vec<(BigInt, BigInt)> = joints.iter().cloned().zip(priors).map(|(j, p)| mul(j, p)).collect();
    let common: BigInt = weighted.iter().map(|(_, d)| d).product();
    let scaled: Vec<BigInt> = weighted.iter().map(|(n, d)| n * (&common / d)).collect();
    let total: BigInt = scaled.iter().sum();
    let evidence = BigRational::new_raw(total.clone(), common);
    let posterior = if total.is_zero() {
        vec![BigRational::zero(); 5]
    } else {
        scaled.into_iter().map(|n| BigRational::new_raw(n, total.clone())).collect()
    };
    ExactBayes {
        joints: joints.into_iter().map(|(n, d)| BigRational::new_raw(n, d)).collect(),
        evidence,
        posterior,
    }
}

/// Decimal rows straight from the case-study tables (rows = features,
/// columns = grades A..E), transposed to per-grade rows.
pub fn grade_rows(feature_rows: &[[&str; 5]]) -> Vec<Vec<BigRational>> {
    (0..5)
        .map(|g| feature_rows.iter().map(|row| dec(row[g])).collect())
        .collect()
}

pub const U1_ROWS: [[&str; 5]; 5] = [
    ["0.004", "0.11", "0.07", "0.01", "0.00"],
    ["0.8", "0.6", "0.4", "0.2", "0.1"],
    ["0.7", "0.9", "0.5", "0.3", "0.1"],
    ["0.9", "0.8", "0.6", "0.3", "0.0"],
    ["0.6", "0.8", "0.7", "0.5", "0.3"],
];

pub const U2_ROWS: [[&str; 5]; 5] = [
    ["0.004", "0.9", "0.8", "0.4", "0.1"],
    ["0.6", "0.9", "0.6", "0.3", "0.1"],
    ["0.5", "0.7", "0.6", "0.4", "0.2"],
    ["0.6", "0.5", "0.7", "0.5", "0.1"],
    ["0.5", "0.6", "0.7", "0.6", "0.4"],
];

pub const U1_PRIORS: [&str; 5] = ["0.15", "0.25", "0.30", "0.20", "0.10"];
pub const U2_PRIORS: [&str; 5] = ["0.05", "0.20", "0.50", "0.20", "0.05"];
pub const U2_REPORTED_JOINTS: [&str; 5] = ["0.063", "0.132", "0.141", "0.014", "0.000"];

pub fn rats(values: &[&str]) -> Vec<BigRational> {
    values.iter().map(|v| dec(v)).collect()
}

/// Relative difference, with an absolute floor for values near zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-300 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}
