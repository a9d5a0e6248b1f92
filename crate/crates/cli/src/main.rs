use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use mgcs_core::config::{dataset_to_csv, load_dataset, load_grades};
use mgcs_core::dtree::{accuracy, SAMPLER_ALGORITHM};
use mgcs_core::format::{round_sig, sig, DEFAULT_SIG_DIGITS};
use mgcs_core::reporting::{comparison_text, parse_weights, uniform_weights};
use mgcs_core::{
    classify, classify_all, comparison_table, confusion_matrix, decide, export_tree_dot,
    load_component, load_config, parse_grade, predict_tree, sample_components, sankey_flows,
    train_tree, ClassificationResult, ComponentRecord, Grade, ScenarioConfig, TreeNode,
    TreeParams, UsagePath,
};

#[derive(Parser)]
#[command(name = "mgcs", version, about = "Grade end-of-life building components and plan circular interventions")]
struct Cli {
    /// Significant digits for printed reals.
    #[arg(long, global = true, default_value_t = DEFAULT_SIG_DIGITS)]
    precision: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathKind {
    Reuse,
    Upcycle,
    Downcycle,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario config against the schema and its invariants.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Grade a component under one or all scenarios.
    Grade {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        component: PathBuf,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// List feasible circular interventions for a grade and usage path.
    Interventions {
        #[arg(long)]
        grade: String,
        #[arg(long, value_enum)]
        path: PathKind,
        #[arg(long, allow_negative_numbers = true)]
        offset: Option<i64>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Draw a labelled synthetic dataset from a scenario's model.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scenario: String,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a decision tree on a labelled dataset CSV.
    TrainTree {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        max_depth: usize,
        #[arg(long)]
        min_leaf: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict a component's grade with a trained tree.
    PredictTree {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        component: PathBuf,
    },
    /// Export plot data.
    Export {
        #[command(subcommand)]
        what: ExportCommand,
    },
    /// Build a confusion matrix from predicted and true grade lists.
    Confusion {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExportCommand {
    /// Component -> scenario -> grade flows as JSON.
    Sankey {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        component: PathBuf,
        /// Scenario weights as `U1=0.5,U2=0.5`; uniform when omitted.
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Graphviz DOT rendering of a trained tree.
    TreeDot {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn config_from(path: &Path) -> Result<ScenarioConfig> {
    load_config(&read(path)?).with_context(|| format!("loading config {}", path.display()))
}

fn component_from(path: &Path) -> Result<ComponentRecord> {
    load_component(&read(path)?).with_context(|| format!("loading component {}", path.display()))
}

fn tree_from(path: &Path) -> Result<TreeNode> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing tree {}", path.display()))
}

/// Rounds every float in a JSON document to `digits` significant digits.
fn round_json(v: Value, digits: usize) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(0.0), digits);
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(|x| round_json(x, digits)).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, x)| (k, round_json(x, digits))).collect()),
        other => other,
    }
}

fn to_json<T: serde::Serialize>(value: &T, digits: usize) -> Result<String> {
    let v = round_json(serde_json::to_value(value)?, digits);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn grade_table(cfg: &ScenarioConfig, record: &ComponentRecord, r: &ClassificationResult, digits: usize) -> String {
    let mut out = String::new();
    let scenario = cfg.scenario(&r.scenario_id).ok();
    let label = scenario.map(|s| s.label()).unwrap_or("");
    let _ = writeln!(out, "scenario {} ({label}), component {}", r.scenario_id, record.component_id);
    let _ = writeln!(out, "{:<6}{:<14}{:<14}posterior", "grade", "prior", "joint");
    for g in Grade::ALL {
        let prior = scenario.map_or(f64::NAN, |s| s.priors()[g]);
        let _ = writeln!(
            out,
            "{:<6}{:<14}{:<14}{}",
            g.to_string(),
            sig(prior, digits),
            sig(r.joints[g], digits),
            sig(r.posterior.get(g), digits)
        );
    }
    let _ = writeln!(out, "final grade: {} (p = {})", r.final_grade, sig(r.final_probability(), digits));
    let _ = writeln!(out, "evidence: {}", sig(r.evidence, digits));
    let thresholds: Vec<String> = r
        .threshold_report
        .iter()
        .map(|(k, s)| format!("{k} {}", serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()))
        .collect();
    let _ = writeln!(out, "thresholds: {}", if thresholds.is_empty() { "none".into() } else { thresholds.join(", ") });
    let best: Vec<String> = r.per_feature_best.iter().map(|(k, g)| format!("{k}={g}")).collect();
    let _ = writeln!(out, "per-feature best grade: {}", best.join(" "));
    out
}

fn run(cli: Cli) -> Result<()> {
    let digits = cli.precision.max(1);
    match cli.command {
        Command::Validate { config } => {
            let cfg = config_from(&config)?;
            let ids: Vec<&str> = cfg.scenarios.iter().map(|s| s.id()).collect();
            println!("ok: {} scenario(s): {}", ids.len(), ids.join(", "));
        }
        Command::Grade {
            config,
            component,
            scenario,
            format,
        } => {
            let cfg = config_from(&config)?;
            let record = component_from(&component)?;
            let outcomes: Vec<(String, mgcs_core::Result<ClassificationResult>)> = match &scenario {
                Some(id) => vec![(id.clone(), classify(&record, cfg.scenario(id)?))],
                None => cfg
                    .scenarios
                    .iter()
                    .map(|s| s.id().to_string())
                    .zip(classify_all(&record, &cfg.scenarios))
                    .collect(),
            };
            let mut results = Vec::new();
            let mut failed = 0usize;
            for (id, outcome) in outcomes {
                match outcome {
                    Ok(r) => results.push(r),
                    Err(e) => {
                        eprintln!("error: scenario {id}: {e}");
                        failed += 1;
                    }
                }
            }
            match format {
                Format::Json => print!("{}", to_json(&results, digits)?),
                Format::Table => {
                    for r in &results {
                        println!("{}", grade_table(&cfg, &record, r, digits));
                    }
                    if results.len() > 1 {
                        print!("{}", comparison_text(&comparison_table(&results), digits));
                    }
                }
            }
            if failed > 0 {
                bail!("{failed} scenario(s) failed");
            }
        }
        Command::Interventions {
            grade,
            path,
            offset,
            format,
        } => {
            let grade = parse_grade(&grade)?;
            let kind = match path {
                PathKind::Reuse => "reuse",
                PathKind::Upcycle => "upcycle",
                PathKind::Downcycle => "downcycle",
            };
            let path = UsagePath::parse(kind, offset)?;
            let decisions = decide(grade, path);
            match format {
                Format::Json => print!("{}", to_json(&decisions, digits)?),
                Format::Table => {
                    println!("grade {grade}, path {path}");
                    for d in decisions {
                        let result = d.resulting_grade.map_or("-".to_string(), |g| g.to_string());
                        println!(
                            "  {}: result {result}, usage offset {:+}, action: {}",
                            d.class, d.target_offset, d.action
                        );
                    }
                }
            }
        }
        Command::Sample {
            config,
            scenario,
            n,
            seed,
            out,
        } => {
            if n < 0 {
                bail!("--n must be non-negative, got {n}");
            }
            let cfg = config_from(&config)?;
            let spec = cfg.scenario(&scenario)?;
            let data = sample_components(spec, n as usize, seed)?;
            let meta = format!("generator={SAMPLER_ALGORITHM}\nseed={seed}\nscenario={scenario}\nn={n}");
            write(&out, &dataset_to_csv(&data, Some(&meta)))?;
        }
        Command::TrainTree {
            data,
            max_depth,
            min_leaf,
            out,
        } => {
            let dataset = load_dataset(&read(&data)?).context("loading dataset")?;
            let tree = train_tree(&dataset, TreeParams { max_depth, min_leaf })?;
            write(&out, &(serde_json::to_string_pretty(&tree)? + "\n"))?;
            println!(
                "trained tree: depth {}, {} nodes, training accuracy {}",
                tree.depth(),
                tree.node_count(),
                sig(accuracy(&tree, &dataset)?, digits)
            );
        }
        Command::PredictTree { tree, component } => {
            let tree = tree_from(&tree)?;
            let record = component_from(&component)?;
            println!("{}", predict_tree(&tree, &record)?);
        }
        Command::Export { what } => match what {
            ExportCommand::Sankey {
                config,
                component,
                weights,
                out,
            } => {
                let cfg = config_from(&config)?;
                let record = component_from(&component)?;
                let results = classify_all(&record, &cfg.scenarios)
                    .into_iter()
                    .collect::<mgcs_core::Result<Vec<_>>>()?;
                let weights = match weights {
                    Some(w) => parse_weights(&w)?,
                    None => uniform_weights(&results),
                };
                let flows = sankey_flows(&record.component_id, &results, &weights)?;
                write(&out, &to_json(&flows, digits)?)?;
            }
            ExportCommand::TreeDot { tree, out } => {
                write(&out, &export_tree_dot(&tree_from(&tree)?))?;
            }
        },
        Command::Confusion { pred, truth, out } => {
            let predicted = load_grades(&read(&pred)?).context("loading predictions")?;
            let truth = load_grades(&read(&truth)?).context("loading truth")?;
            write(&out, &confusion_matrix(&predicted, &truth)?.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
