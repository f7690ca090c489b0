//! Batch experiment harness: flat key-value config files, end-to-end runs,
//! deterministic report/trajectory artifacts, and one-parameter sweeps.
//!
//! Config files hold one `key = value` pair per line; `#` starts a comment.
//! Data comes either from a seeded synthetic spec or from feature files.
//! Reports are `metric = value` lines under a `# ifcda-report v1` header and
//! are byte-deterministic for a fixed config and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::adaptation::{run_ifcda, AdaptationConfig, AdaptationOutcome};
use crate::dataset::{load_features, DomainRole, FileFormat};
use crate::error::{Error, Result};
use crate::filter::KEEP_ALL;
use crate::graph::{build_graph, SigmaMode};
use crate::metrics::{compute_metrics, predict_hard, MetricsReport};
use crate::synthetic::{make_synthetic, SyntheticSpec};
use crate::Scenario;

/// Where the two domains come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    Files {
        source: PathBuf,
        target: PathBuf,
        format: FileFormat,
        /// Explicit shared class count; derived from the source labels when
        /// absent.
        class_count: Option<usize>,
    },
}

/// A fully parsed experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: DataSource,
    /// Z-score each domain per dimension after loading.
    pub standardize: bool,
    /// Projected dimension; `None` resolves to min(10, m) once the feature
    /// dimension is known.
    pub subspace_dim: Option<usize>,
    /// All remaining hyperparameters (its `subspace_dim` is overwritten by
    /// the resolved value at run time).
    pub adaptation: AdaptationConfig,
    pub out_dir: Option<PathBuf>,
    pub dump_graph: bool,
}

impl RunConfig {
    /// Synthetic closed-set run with default hyperparameters.
    pub fn synthetic_default(scenario: Scenario) -> Self {
        RunConfig {
            data: DataSource::Synthetic(SyntheticSpec::default()),
            standardize: true,
            subspace_dim: None,
            adaptation: AdaptationConfig::for_scenario(scenario),
            out_dir: None,
            dump_graph: false,
        }
    }

    /// Set the seed everywhere it matters (generator and pipeline).
    pub fn set_seed(&mut self, seed: u64) {
        self.adaptation.seed = seed;
        if let DataSource::Synthetic(spec) = &mut self.data {
            spec.seed = seed;
        }
    }
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_run_config(&text)
}

/// Parse the flat `key = value` format. Unknown and duplicate keys are
/// config errors so typos fail loudly.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", idx + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("duplicate key '{key}'")));
        }
        pairs.push((key, value));
    }

    let mut cfg = Parsed::default();
    for (key, value) in &pairs {
        cfg.apply(key, value)?;
    }
    cfg.finish()
}

/// Intermediate parse state with everything optional.
#[derive(Default)]
struct Parsed {
    scenario: Option<Scenario>,
    synthetic: Option<bool>,
    classes: Option<usize>,
    novel_classes: Option<usize>,
    source_samples_per_class: Option<usize>,
    target_samples_per_class: Option<usize>,
    dimension: Option<usize>,
    mean_shift: Option<f64>,
    rotation_deg: Option<f64>,
    noise_scale: Option<f64>,
    source_features: Option<PathBuf>,
    target_features: Option<PathBuf>,
    format: Option<String>,
    csv_header: Option<bool>,
    csv_labels: Option<bool>,
    standardize: Option<bool>,
    iterations: Option<usize>,
    subspace_dim: Option<usize>,
    neighbor_count: Option<usize>,
    filter_keep: Option<usize>,
    tau: Option<f64>,
    alpha_set: Option<f64>,
    gamma: Option<f64>,
    beta: Option<f64>,
    lambda: Option<f64>,
    delta: Option<f64>,
    tie_projections: Option<Option<bool>>,
    normalize_embeddings: Option<bool>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    dump_graph: Option<bool>,
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for key '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config(format!(
            "invalid value '{value}' for key '{key}' (expected true or false)"
        ))),
    }
}

impl Parsed {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scenario" => self.scenario = Some(value.parse()?),
            "synthetic" => self.synthetic = Some(parse_bool(key, value)?),
            "classes" => self.classes = Some(parse_as(key, value)?),
            "novel_classes" => self.novel_classes = Some(parse_as(key, value)?),
            "source_samples_per_class" => {
                self.source_samples_per_class = Some(parse_as(key, value)?)
            }
            "target_samples_per_class" => {
                self.target_samples_per_class = Some(parse_as(key, value)?)
            }
            "dimension" => self.dimension = Some(parse_as(key, value)?),
            "mean_shift" => self.mean_shift = Some(parse_as(key, value)?),
            "rotation_deg" => self.rotation_deg = Some(parse_as(key, value)?),
            "noise_scale" => self.noise_scale = Some(parse_as(key, value)?),
            "source_features" => self.source_features = Some(PathBuf::from(value)),
            "target_features" => self.target_features = Some(PathBuf::from(value)),
            "format" => self.format = Some(value.to_string()),
            "csv_header" => self.csv_header = Some(parse_bool(key, value)?),
            "csv_labels" => self.csv_labels = Some(parse_bool(key, value)?),
            "standardize" => self.standardize = Some(parse_bool(key, value)?),
            "T" => self.iterations = Some(parse_as(key, value)?),
            "k" => {
                self.subspace_dim = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_as(key, value)?)
                }
            }
            "p" => self.neighbor_count = Some(parse_as(key, value)?),
            "N" => {
                self.filter_keep = Some(if value.eq_ignore_ascii_case("all") {
                    KEEP_ALL
                } else {
                    parse_as(key, value)?
                })
            }
            "tau" => self.tau = Some(parse_as(key, value)?),
            "alpha_set" => self.alpha_set = Some(parse_as(key, value)?),
            "gamma" => self.gamma = Some(parse_as(key, value)?),
            "beta" => self.beta = Some(parse_as(key, value)?),
            "lambda" => self.lambda = Some(parse_as(key, value)?),
            "delta" => self.delta = Some(parse_as(key, value)?),
            "tie_projections" => {
                self.tie_projections = Some(if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_bool(key, value)?)
                })
            }
            "normalize_embeddings" => self.normalize_embeddings = Some(parse_bool(key, value)?),
            "seed" => self.seed = Some(parse_as(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "dump_graph" => self.dump_graph = Some(parse_bool(key, value)?),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig> {
        let scenario = self.scenario.unwrap_or(Scenario::Csda);
        let files_given = self.source_features.is_some() || self.target_features.is_some();
        let synthetic = self.synthetic.unwrap_or(!files_given);
        if synthetic && files_given {
            return Err(Error::Config(
                "synthetic = true conflicts with source_features/target_features".into(),
            ));
        }

        let data = if synthetic {
            let defaults = SyntheticSpec::default();
            let mut spec = SyntheticSpec {
                class_count: self.classes.unwrap_or(defaults.class_count),
                novel_class_count: self.novel_classes.unwrap_or(defaults.novel_class_count),
                source_samples_per_class: self
                    .source_samples_per_class
                    .unwrap_or(defaults.source_samples_per_class),
                target_samples_per_class: self
                    .target_samples_per_class
                    .unwrap_or(defaults.target_samples_per_class),
                dimension: self.dimension.unwrap_or(defaults.dimension),
                mean_shift: self.mean_shift.unwrap_or(defaults.mean_shift),
                rotation_angle: self
                    .rotation_deg
                    .map(f64::to_radians)
                    .unwrap_or(defaults.rotation_angle),
                noise_scale: self.noise_scale.unwrap_or(defaults.noise_scale),
                seed: defaults.seed,
            };
            if let Some(seed) = self.seed {
                spec.seed = seed;
            }
            DataSource::Synthetic(spec)
        } else {
            let source = self.source_features.ok_or_else(|| {
                Error::Config("file mode requires source_features".into())
            })?;
            let target = self.target_features.ok_or_else(|| {
                Error::Config("file mode requires target_features".into())
            })?;
            let format = match self.format.as_deref().unwrap_or("csv") {
                "csv" => FileFormat::Csv {
                    header: self.csv_header.unwrap_or(false),
                    labels: self.csv_labels.unwrap_or(true),
                },
                "bin" | "binary" | "raw" => FileFormat::RawBinary,
                other => {
                    return Err(Error::Config(format!(
                        "unknown format '{other}' (expected csv or bin)"
                    )))
                }
            };
            DataSource::Files {
                source,
                target,
                format,
                class_count: self.classes,
            }
        };

        let mut adaptation = AdaptationConfig::for_scenario(scenario);
        if let Some(v) = self.iterations {
            adaptation.iterations = v;
        }
        if let Some(v) = self.neighbor_count {
            adaptation.neighbor_count = v;
        }
        if let Some(v) = self.filter_keep {
            adaptation.filter.keep = v;
        }
        if let Some(v) = self.tau {
            adaptation.filter.tau = v;
        }
        if let Some(v) = self.alpha_set {
            adaptation.alpha_set = v;
        }
        if let Some(v) = self.gamma {
            adaptation.gamma = v;
        }
        if let Some(v) = self.beta {
            adaptation.beta = v;
        }
        if let Some(v) = self.lambda {
            adaptation.lambda = v;
        }
        if let Some(v) = self.delta {
            adaptation.delta = v;
        }
        if let Some(v) = self.tie_projections {
            adaptation.tie_projections = v;
        }
        if let Some(v) = self.normalize_embeddings {
            adaptation.normalize_embeddings = v;
        }
        if let Some(v) = self.seed {
            adaptation.seed = v;
        }

        Ok(RunConfig {
            data,
            standardize: self.standardize.unwrap_or(true),
            subspace_dim: self.subspace_dim,
            adaptation,
            out_dir: self.out,
            dump_graph: self.dump_graph.unwrap_or(false),
        })
    }
}

/// Per-iteration evaluation of the label snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub overall_accuracy: f64,
    pub os: Option<f64>,
    pub os_star: Option<f64>,
    pub unk: Option<f64>,
}

/// Everything a finished run produces, ready for report serialization.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub scenario: Scenario,
    pub class_count: usize,
    pub source_samples: usize,
    pub target_samples: usize,
    pub standardize: bool,
    /// The hyperparameters actually used (subspace dimension resolved).
    pub resolved: AdaptationConfig,
    /// Graph bandwidth per propagation round.
    pub sigmas: Vec<f64>,
    /// Final hard predictions for the target samples, 1-based.
    pub predictions: Vec<usize>,
    /// Metrics of the final labels, when target ground truth is available.
    pub metrics: Option<MetricsReport>,
    /// Metrics per propagation round (empty without ground truth).
    pub trajectory: Vec<TrajectoryPoint>,
    /// Edge list of the initial graph, when requested.
    pub graph_dump: Option<String>,
}

/// Run one experiment end to end: materialize the data, run the adaptation
/// loop, extract predictions, and evaluate against ground truth if present.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentResult> {
    let (source, target) = match &cfg.data {
        DataSource::Synthetic(spec) => make_synthetic(spec)?,
        DataSource::Files {
            source,
            target,
            format,
            ..
        } => {
            let s = load_features(source, *format, DomainRole::Source)?;
            let t = load_features(target, *format, DomainRole::Target)?;
            (s, t)
        }
    };
    let (source, target) = if cfg.standardize {
        (source.standardized(), target.standardized())
    } else {
        (source, target)
    };

    let y_s = source
        .labels()
        .ok_or_else(|| Error::Label("source file carries no labels".into()))?;
    let class_count = match &cfg.data {
        DataSource::Files {
            class_count: Some(c),
            ..
        } => *c,
        DataSource::Synthetic(spec) => spec.class_count,
        _ => *y_s.iter().max().expect("datasets are never empty"),
    };
    source.validate_labels(class_count)?;
    target.validate_labels(class_count)?;

    let mut adaptation = cfg.adaptation.clone();
    adaptation.subspace_dim = cfg
        .subspace_dim
        .unwrap_or_else(|| source.dim().min(10));

    let outcome = run_ifcda(&source, &target, &adaptation)?;
    let scenario = adaptation.scenario;
    let predictions = predict_hard(&outcome.target_labels, scenario)?;

    let (metrics, trajectory) = match target.labels() {
        Some(truth) => {
            let metrics = compute_metrics(&predictions, truth, class_count, scenario)?;
            let trajectory = evaluate_trajectory(&outcome, truth, class_count, scenario)?;
            (Some(metrics), trajectory)
        }
        None => (None, Vec::new()),
    };

    let graph_dump = if cfg.dump_graph {
        let pooled = {
            let m = source.dim();
            let n = source.len() + target.len();
            let mut x = nalgebra::DMatrix::zeros(m, n);
            x.view_mut((0, 0), (m, source.len()))
                .copy_from(source.features());
            x.view_mut((0, source.len()), (m, target.len()))
                .copy_from(target.features());
            x
        };
        let graph = build_graph(&pooled, adaptation.neighbor_count, SigmaMode::Auto)?;
        let mut buf = Vec::new();
        graph
            .write_edge_list(&mut buf)
            .map_err(|e| Error::io("<graph dump>", e))?;
        Some(String::from_utf8(buf).expect("edge list is ascii"))
    } else {
        None
    };

    Ok(ExperimentResult {
        scenario,
        class_count,
        source_samples: source.len(),
        target_samples: target.len(),
        standardize: cfg.standardize,
        resolved: adaptation,
        sigmas: outcome.snapshots.iter().map(|s| s.sigma).collect(),
        predictions,
        metrics,
        trajectory,
        graph_dump,
    })
}

fn evaluate_trajectory(
    outcome: &AdaptationOutcome,
    truth: &[usize],
    class_count: usize,
    scenario: Scenario,
) -> Result<Vec<TrajectoryPoint>> {
    let mut points = Vec::with_capacity(outcome.snapshots.len());
    for snapshot in &outcome.snapshots {
        let pred = predict_hard(&snapshot.target_labels, scenario)?;
        let report = compute_metrics(&pred, truth, class_count, scenario)?;
        points.push(TrajectoryPoint {
            iteration: snapshot.iteration,
            overall_accuracy: report.overall_accuracy,
            os: report.os,
            os_star: report.os_star,
            unk: report.unk,
        });
    }
    Ok(points)
}

fn display_keep(keep: usize) -> String {
    if keep == KEEP_ALL {
        "all".into()
    } else {
        keep.to_string()
    }
}

/// Render the key-value report. Byte-deterministic for identical results.
pub fn render_report(result: &ExperimentResult) -> String {
    let mut out = String::new();
    let kv = |out: &mut String, key: &str, value: String| {
        writeln!(out, "{key} = {value}").expect("string writes cannot fail");
    };
    out.push_str("# ifcda-report v1\n");
    kv(&mut out, "scenario", result.scenario.to_string());
    kv(&mut out, "classes", result.class_count.to_string());
    kv(&mut out, "source_samples", result.source_samples.to_string());
    kv(&mut out, "target_samples", result.target_samples.to_string());
    kv(&mut out, "standardize", result.standardize.to_string());
    let a = &result.resolved;
    kv(&mut out, "T", a.iterations.to_string());
    kv(&mut out, "k", a.subspace_dim.to_string());
    kv(&mut out, "p", a.neighbor_count.to_string());
    kv(&mut out, "N", display_keep(a.filter.keep));
    kv(&mut out, "tau", a.filter.tau.to_string());
    kv(&mut out, "alpha_set", a.alpha_set.to_string());
    kv(&mut out, "gamma", a.gamma.to_string());
    kv(&mut out, "beta", a.beta.to_string());
    kv(&mut out, "lambda", a.lambda.to_string());
    kv(&mut out, "delta", a.delta.to_string());
    kv(&mut out, "tie_projections", a.tie().to_string());
    kv(
        &mut out,
        "normalize_embeddings",
        a.normalize_embeddings.to_string(),
    );
    kv(&mut out, "seed", a.seed.to_string());
    for (i, sigma) in result.sigmas.iter().enumerate() {
        kv(&mut out, &format!("sigma_{i}"), sigma.to_string());
    }
    match &result.metrics {
        Some(metrics) => {
            kv(&mut out, "truth", "present".into());
            kv(
                &mut out,
                "accuracy",
                metrics.overall_accuracy.to_string(),
            );
            if let Some(first) = result.trajectory.first() {
                kv(
                    &mut out,
                    "baseline_accuracy",
                    first.overall_accuracy.to_string(),
                );
            }
            if result.scenario == Scenario::Osda {
                if let Some(os) = metrics.os {
                    kv(&mut out, "os", os.to_string());
                }
                if let Some(os_star) = metrics.os_star {
                    kv(&mut out, "os_star", os_star.to_string());
                }
                if let Some(unk) = metrics.unk {
                    kv(&mut out, "unk", unk.to_string());
                }
            }
            for class in &metrics.per_class {
                kv(
                    &mut out,
                    &format!("per_class_{}", class.class),
                    class.accuracy().to_string(),
                );
            }
        }
        None => kv(&mut out, "truth", "absent".into()),
    }
    out
}

/// Render the per-iteration CSV: `iter,accuracy` for closed-set runs,
/// `iter,OS,OS_star,UNK` for open-set runs.
pub fn render_trajectory_csv(result: &ExperimentResult) -> String {
    let mut out = String::new();
    match result.scenario {
        Scenario::Csda => {
            out.push_str("iter,accuracy\n");
            for p in &result.trajectory {
                writeln!(out, "{},{}", p.iteration, p.overall_accuracy)
                    .expect("string writes cannot fail");
            }
        }
        Scenario::Osda => {
            out.push_str("iter,OS,OS_star,UNK\n");
            for p in &result.trajectory {
                writeln!(
                    out,
                    "{},{},{},{}",
                    p.iteration,
                    p.os.unwrap_or(f64::NAN),
                    p.os_star.unwrap_or(f64::NAN),
                    p.unk.unwrap_or(0.0)
                )
                .expect("string writes cannot fail");
            }
        }
    }
    out
}

/// Final predictions as `index,label` lines.
pub fn render_predictions_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("index,label\n");
    for (i, label) in result.predictions.iter().enumerate() {
        writeln!(out, "{i},{label}").expect("string writes cannot fail");
    }
    out
}

/// Write report, trajectory, predictions, and the optional graph dump into
/// `dir`; returns the created paths.
pub fn write_artifacts(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut write = |name: &str, contents: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    write("report.txt", render_report(result))?;
    if !result.trajectory.is_empty() {
        write("trajectory.csv", render_trajectory_csv(result))?;
    }
    write("predictions.csv", render_predictions_csv(result))?;
    if let Some(dump) = &result.graph_dump {
        write("graph_edges.txt", dump.clone())?;
    }
    Ok(written)
}

/// The hyperparameters a sweep may vary, named as in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Iterations,
    SubspaceDim,
    NeighborCount,
    FilterKeep,
    Tau,
    AlphaSet,
    Gamma,
    Beta,
    Lambda,
    Delta,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" => Ok(SweepParam::Iterations),
            "k" => Ok(SweepParam::SubspaceDim),
            "p" => Ok(SweepParam::NeighborCount),
            "N" => Ok(SweepParam::FilterKeep),
            "tau" => Ok(SweepParam::Tau),
            "alpha_set" => Ok(SweepParam::AlphaSet),
            "gamma" => Ok(SweepParam::Gamma),
            "beta" => Ok(SweepParam::Beta),
            "lambda" => Ok(SweepParam::Lambda),
            "delta" => Ok(SweepParam::Delta),
            other => Err(Error::Config(format!(
                "unknown sweep parameter '{other}' (expected one of T, k, p, N, tau, alpha_set, gamma, beta, lambda, delta)"
            ))),
        }
    }
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Iterations => "T",
            SweepParam::SubspaceDim => "k",
            SweepParam::NeighborCount => "p",
            SweepParam::FilterKeep => "N",
            SweepParam::Tau => "tau",
            SweepParam::AlphaSet => "alpha_set",
            SweepParam::Gamma => "gamma",
            SweepParam::Beta => "beta",
            SweepParam::Lambda => "lambda",
            SweepParam::Delta => "delta",
        }
    }

    /// Apply one grid value to a config clone.
    fn apply(self, value: &str, cfg: &mut RunConfig) -> Result<()> {
        let bad = |v: &str| Error::Config(format!("invalid grid value '{v}' for {}", self.as_str()));
        match self {
            SweepParam::Iterations => {
                cfg.adaptation.iterations = value.parse().map_err(|_| bad(value))?
            }
            SweepParam::SubspaceDim => {
                cfg.subspace_dim = Some(value.parse().map_err(|_| bad(value))?)
            }
            SweepParam::NeighborCount => {
                cfg.adaptation.neighbor_count = value.parse().map_err(|_| bad(value))?
            }
            SweepParam::FilterKeep => {
                cfg.adaptation.filter.keep = if value.eq_ignore_ascii_case("all") {
                    KEEP_ALL
                } else {
                    value.parse().map_err(|_| bad(value))?
                }
            }
            SweepParam::Tau => cfg.adaptation.filter.tau = value.parse().map_err(|_| bad(value))?,
            SweepParam::AlphaSet => {
                cfg.adaptation.alpha_set = value.parse().map_err(|_| bad(value))?
            }
            SweepParam::Gamma => cfg.adaptation.gamma = value.parse().map_err(|_| bad(value))?,
            SweepParam::Beta => cfg.adaptation.beta = value.parse().map_err(|_| bad(value))?,
            SweepParam::Lambda => cfg.adaptation.lambda = value.parse().map_err(|_| bad(value))?,
            SweepParam::Delta => cfg.adaptation.delta = value.parse().map_err(|_| bad(value))?,
        }
        Ok(())
    }
}

/// One sweep grid point and its finished run.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: String,
    pub result: ExperimentResult,
}

/// Run the base config once per grid value with the seed held fixed.
pub fn sweep(param: SweepParam, grid: &[String], base: &RunConfig) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Config("empty sweep grid".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for value in grid {
        let mut cfg = base.clone();
        cfg.dump_graph = false;
        param.apply(value, &mut cfg)?;
        let result = run_experiment(&cfg)?;
        rows.push(SweepRow {
            value: value.clone(),
            result,
        });
    }
    Ok(rows)
}

/// Summary CSV over a finished sweep: one row per grid value.
pub fn render_sweep_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let osda = rows
        .first()
        .map(|r| r.result.scenario == Scenario::Osda)
        .unwrap_or(false);
    let mut out = String::new();
    if osda {
        writeln!(out, "{},OS,OS_star,UNK", param.as_str()).expect("string writes cannot fail");
    } else {
        writeln!(out, "{},accuracy", param.as_str()).expect("string writes cannot fail");
    }
    for row in rows {
        let m = row.result.metrics.as_ref();
        if osda {
            writeln!(
                out,
                "{},{},{},{}",
                row.value,
                m.and_then(|m| m.os).unwrap_or(f64::NAN),
                m.and_then(|m| m.os_star).unwrap_or(f64::NAN),
                m.and_then(|m| m.unk).unwrap_or(0.0)
            )
            .expect("string writes cannot fail");
        } else {
            writeln!(
                out,
                "{},{}",
                row.value,
                m.map(|m| m.overall_accuracy).unwrap_or(f64::NAN)
            )
            .expect("string writes cannot fail");
        }
    }
    out
}
