//! The `run`, `classify`, `certify` and `report` subcommands. Each writes its
//! files atomically into the output directory and returns the text to print.

use std::fs;
use std::path::{Path, PathBuf};

use flashlab_core::determinism::{
    no_effectively_causal_nonlocal_determinism_check, DeterminismError,
};
use flashlab_core::models::{local_hv, ModelError};
use flashlab_core::quantum::born_joint;
use flashlab_core::{Frame, ModelId, ModelParams, Outcome, SettingPair};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{classify, params_digest, ClassificationReport, ClassifierError};
use crate::config::{ConfigError, RunConfig};
use crate::output::{sig6, table, write_flash_csv, write_json};
use crate::sampling::outcome_counts;

pub const RUN_FILE: &str = "run.json";
pub const FLASH_FILE: &str = "flashes.csv";
pub const CLASSIFICATION_FILE: &str = "classification.json";
pub const CERTIFICATE_FILE: &str = "certificate.json";

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid option: {0}")]
    Option(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("no report files in {0}")]
    NothingToReport(PathBuf),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Determinism(#[from] DeterminismError),
}

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub n: Option<u64>,
    pub seed: Option<u64>,
    pub frame: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub out: Option<PathBuf>,
    pub csv: bool,
}

/// Applies `overrides` to `config`. The master seed comes from the flag, then
/// the file, then `env_seed`, then 0.
pub fn resolve(
    mut config: RunConfig,
    overrides: &Overrides,
    env_seed: Option<u64>,
) -> Result<RunConfig, CommandError> {
    if let Some(m) = &overrides.model {
        config.model = m
            .parse::<ModelId>()
            .map_err(|_| CommandError::Option(format!("unknown model {m:?}")))?;
    }
    if let Some(n) = overrides.n {
        if n == 0 {
            return Err(CommandError::Option("--n must be positive".into()));
        }
        config = config.with_n(n);
    }
    if let Some(r) = overrides.frame {
        config.run.frame =
            Frame::new(r).map_err(|e| CommandError::Option(format!("--frame: {e}")))?;
    }
    let SettingPair { a, b } = config.run.settings;
    config.run.settings = SettingPair::new(
        overrides.a.unwrap_or(a.angle()),
        overrides.b.unwrap_or(b.angle()),
    );
    if let Some(out) = &overrides.out {
        config.out = out.clone();
    }
    config.run.csv |= overrides.csv;
    let seed = overrides
        .seed
        .or(config.master_seed)
        .or(env_seed)
        .unwrap_or(0);
    Ok(config.with_seed(seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    /// `"+1,-1"` style label of `(α, β)`.
    pub outcome: String,
    pub count: u64,
    pub empirical: f64,
    pub std_error: f64,
    pub oracle: f64,
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub params_digest: String,
    pub settings: SettingPair,
    pub frame: Frame,
    pub n: u64,
    pub master_seed: u64,
    pub conclusive: u64,
    pub inconclusive: u64,
    /// Fraction of conclusive runs whose first flash fell in region A.
    pub first_in_a: f64,
    pub outcomes: Vec<OutcomeRow>,
}

/// Analytic joint distribution of a built-in model.
pub fn oracle_joint(model: ModelId, params: &ModelParams, settings: SettingPair) -> [f64; 4] {
    match model {
        ModelId::Rgrwf | ModelId::PreferredFrame => born_joint(params.state(), settings).as_array(),
        ModelId::LocalHv => {
            // uniform marginals: P(α, β) = (1 + αβE) / 4
            let e = local_hv::correlator(settings.a, settings.b);
            Outcome::ALL.map(|o| 0.25 * (1.0 + f64::from(o.product()) * e))
        }
    }
}

fn label(o: Outcome) -> String {
    format!("{:+},{:+}", o.alpha.sign(), o.beta.sign())
}

fn write(path: PathBuf, value: &impl Serialize) -> Result<PathBuf, CommandError> {
    write_json(&path, value).map_err(|source| CommandError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn cmd_run(config: &RunConfig) -> Result<String, CommandError> {
    let seed = config.master_seed.unwrap_or(0);
    let RunConfig {
        model, params, n, ..
    } = config;
    let (settings, frame) = (config.run.settings, config.run.frame);
    let counts = outcome_counts(model, params, settings, frame, *n, seed)?;
    let oracle = oracle_joint(*model, params, settings);
    let m = counts.conclusive() as f64;
    let outcomes: Vec<OutcomeRow> = Outcome::ALL
        .iter()
        .map(|&o| {
            let c = counts.counts[o.index()];
            let p = c as f64 / m;
            OutcomeRow {
                outcome: label(o),
                count: c,
                empirical: p,
                std_error: (p * (1.0 - p) / m).sqrt(),
                oracle: oracle[o.index()],
            }
        })
        .collect();
    let report = RunReport {
        model: model.as_str().to_owned(),
        params_digest: params_digest(params),
        settings,
        frame,
        n: *n,
        master_seed: seed,
        conclusive: counts.conclusive(),
        inconclusive: counts.inconclusive,
        first_in_a: counts.first_in_a as f64 / m,
        outcomes,
    };
    let path = write(config.out.join(RUN_FILE), &report)?;
    let mut text = render_run(&report);
    text.push_str(&format!("wrote {}\n", path.display()));
    if config.run.csv {
        let csv_path = config.out.join(FLASH_FILE);
        write_flash_csv(&csv_path, model, params, settings, frame, *n, seed).map_err(|source| {
            CommandError::Write {
                path: csv_path.clone(),
                source,
            }
        })?;
        text.push_str(&format!("wrote {}\n", csv_path.display()));
    }
    Ok(text)
}

pub fn render_run(r: &RunReport) -> String {
    let rows: Vec<Vec<String>> = r
        .outcomes
        .iter()
        .map(|o| {
            vec![
                o.outcome.clone(),
                sig6(o.empirical),
                sig6(o.std_error),
                sig6(o.oracle),
            ]
        })
        .collect();
    format!(
        "model {}  a = {}  b = {}  frame χ = {}  n = {}  seed = {}\n{}inconclusive {} of {}  first flash in A {}\n",
        r.model,
        sig6(r.settings.a.angle()),
        sig6(r.settings.b.angle()),
        sig6(r.frame.rapidity()),
        r.n,
        r.master_seed,
        table(&["outcome", "empirical", "std err", "oracle"], &rows),
        r.inconclusive,
        r.n,
        sig6(r.first_in_a),
    )
}

pub fn cmd_classify(config: &RunConfig) -> Result<String, CommandError> {
    let report = classify(&config.model, &config.params, &config.classify)?;
    let path = write(config.out.join(CLASSIFICATION_FILE), &report)?;
    Ok(format!(
        "{}wrote {}\n",
        render_classification(&report),
        path.display()
    ))
}

pub fn render_classification(r: &ClassificationReport) -> String {
    let rows: Vec<Vec<String>> = r
        .tests
        .iter()
        .map(|t| {
            vec![
                t.name.clone(),
                sig6(t.statistic),
                sig6(t.threshold),
                sig6(t.p_bound),
                t.verdict.to_string(),
            ]
        })
        .collect();
    format!(
        "model {}  n = {} per cell  seed = {}\n{}{}\n",
        r.model,
        r.n,
        r.master_seed,
        table(
            &["test", "statistic", "threshold", "p_bound", "verdict"],
            &rows
        ),
        r.row()
    )
}

pub fn cmd_certify(config: &RunConfig) -> Result<String, CommandError> {
    let certificate = no_effectively_causal_nonlocal_determinism_check(&config.certify)?;
    let path = write(config.out.join(CERTIFICATE_FILE), &certificate)?;
    let value = serde_json::to_value(&certificate).expect("certificate serializes");
    Ok(format!(
        "{}wrote {}\n",
        render_certificate(&value),
        path.display()
    ))
}

/// Renders a certificate from its JSON form, so the same code serves
/// `certify` and `report`.
pub fn render_certificate(c: &serde_json::Value) -> String {
    let num = |v: &serde_json::Value| v.as_f64().unwrap_or(f64::NAN);
    let mut rows = Vec::new();
    for l in c["levels"].as_array().into_iter().flatten() {
        rows.push(vec![
            l["k"].to_string(),
            l["candidates"].to_string(),
            l["count"].to_string(),
            l["local_count"].to_string(),
            sig6(num(&l["max_chsh"])),
        ]);
    }
    let local = num(&c["max_chsh"]);
    let quantum = num(&c["quantum_chsh"]).abs();
    let relation = if local < quantum { "<" } else { ">=" };
    let w = &c["wigner"];
    let mut text = table(&["k", "candidates", "causal", "local", "max |CHSH|"], &rows);
    text.push_str(&format!(
        "local max {} {relation} quantum {}\n",
        sig6(local),
        sig6(quantum)
    ));
    text.push_str(&format!(
        "epr filter: {} of {} strategies anticorrelated\n",
        c["epr_filter"]["survivor_count"], c["epr_filter"]["candidates"]
    ));
    text.push_str(&format!(
        "wigner θ = {}: worst strategy {} <= {} ({}), quantum {} vs {} ({})\n",
        sig6(num(&w["theta"])),
        sig6(num(&w["lhs"])),
        sig6(num(&w["rhs"])),
        if w["all_satisfied"].as_bool() == Some(true) {
            "all satisfied"
        } else {
            "VIOLATED"
        },
        sig6(num(&w["quantum_lhs"])),
        sig6(num(&w["quantum_rhs"])),
        if w["quantum_violates"].as_bool() == Some(true) {
            "violated"
        } else {
            "satisfied"
        },
    ));
    let j = &c["janus_witness"];
    if j.is_null() {
        text.push_str("janus witness: none found\n");
    } else {
        let region = j["region"].as_str().unwrap_or("?");
        let (before, after) = (&j["setting_pairs"][0], &j["setting_pairs"][1]);
        let later = if region == "A" { "b" } else { "a" };
        text.push_str(&format!(
            "janus witness: frame χ = {}, region {region} outcome {:+} -> {:+} when {later} goes {} -> {} (sample {})\n",
            sig6(num(&j["frame"]["rapidity"])),
            j["outcomes"][0].as_i64().unwrap_or(0),
            j["outcomes"][1].as_i64().unwrap_or(0),
            sig6(num(&before[later])),
            sig6(num(&after[later])),
            j["sample"],
        ));
    }
    text
}

fn read_json(path: &Path) -> Result<Option<serde_json::Value>, CommandError> {
    match fs::read_to_string(path) {
        Ok(s) => serde_json::from_str(&s)
            .map(Some)
            .map_err(|e| CommandError::Read {
                path: path.to_owned(),
                message: e.to_string(),
            }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CommandError::Read {
            path: path.to_owned(),
            message: e.to_string(),
        }),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(
    path: &Path,
    v: serde_json::Value,
) -> Result<T, CommandError> {
    serde_json::from_value(v).map_err(|e| CommandError::Read {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

/// Re-renders whatever reports exist in `out`.
pub fn cmd_report(out: &Path) -> Result<String, CommandError> {
    let mut sections = Vec::new();
    let run_path = out.join(RUN_FILE);
    if let Some(v) = read_json(&run_path)? {
        sections.push(render_run(&parse(&run_path, v)?));
    }
    let class_path = out.join(CLASSIFICATION_FILE);
    if let Some(v) = read_json(&class_path)? {
        sections.push(render_classification(&parse(&class_path, v)?));
    }
    if let Some(v) = read_json(&out.join(CERTIFICATE_FILE))? {
        sections.push(render_certificate(&v));
    }
    if sections.is_empty() {
        return Err(CommandError::NothingToReport(out.to_owned()));
    }
    Ok(sections.join("\n"))
}
