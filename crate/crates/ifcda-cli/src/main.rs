//! Batch CLI over the ifcda library.
//!
//! Subcommands:
//! * `ifcda run <config>` — one experiment, artifacts written to the output
//!   directory (report.txt, trajectory.csv, predictions.csv).
//! * `ifcda sweep <param> <grid> <config>` — one run per grid value with the
//!   seed held fixed; per-value artifact directories plus a summary CSV.
//! * `ifcda synth` — generate a synthetic task as CSV files plus a matching
//!   config.
//!
//! Exit codes: 0 success, 2 config errors, 3 file errors, 4 data/format/label
//! errors, 5 pipeline/numeric errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ifcda::dataset::{save_features, FileFormat};
use ifcda::error::Error;
use ifcda::experiment::{
    load_run_config, render_sweep_csv, run_experiment, sweep, write_artifacts, RunConfig,
    SweepParam, SweepRow,
};
use ifcda::synthetic::{make_synthetic, SyntheticSpec};
use ifcda::{DataSource, Scenario};

#[derive(Parser)]
#[command(name = "ifcda", version, about = "Unified closed/open-set domain adaptation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunOverrides {
    /// Override the config seed (synthetic generator and pipeline).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for artifacts (overrides the config `out` key).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat the first CSV row as a header.
    #[arg(long)]
    csv_header: bool,
    /// Also write the initial similarity graph as an edge list.
    #[arg(long)]
    dump_graph: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file.
    Run {
        /// Path to a key-value config file.
        config: PathBuf,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Run a one-parameter sweep: one experiment per grid value.
    Sweep {
        /// Parameter name: T, k, p, N, tau, alpha_set, gamma, beta, lambda, delta.
        param: String,
        /// Comma-separated grid values, e.g. "0.9,0.95,0.98".
        grid: String,
        /// Path to the base config file.
        config: PathBuf,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Generate a synthetic cross-domain task as CSV files plus a config.
    Synth {
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 0)]
        novel_classes: usize,
        #[arg(long, default_value_t = 60)]
        source_samples: usize,
        #[arg(long, default_value_t = 60)]
        target_samples: usize,
        #[arg(long, default_value_t = 2)]
        dimension: usize,
        #[arg(long, default_value_t = 1.0)]
        mean_shift: f64,
        #[arg(long, default_value_t = 30.0)]
        rotation_deg: f64,
        #[arg(long, default_value_t = 0.8)]
        noise_scale: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output directory for source.csv, target.csv and experiment.conf.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Io { .. } => 3,
        Error::Format(_) | Error::Data(_) | Error::Label(_) | Error::Parameter(_) => 4,
        Error::Propagation(_)
        | Error::Normalization(_)
        | Error::DegenerateWeights(_)
        | Error::Solver(_)
        | Error::Metric(_)
        | Error::Pipeline { .. } => 5,
    }
}

fn apply_overrides(cfg: &mut RunConfig, overrides: &RunOverrides) {
    if let Some(seed) = overrides.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &overrides.out {
        cfg.out_dir = Some(out.clone());
    }
    if overrides.csv_header {
        if let DataSource::Files {
            format: FileFormat::Csv { header, .. },
            ..
        } = &mut cfg.data
        {
            *header = true;
        }
    }
    if overrides.dump_graph {
        cfg.dump_graph = true;
    }
}

fn print_summary(result: &ifcda::experiment::ExperimentResult) {
    match &result.metrics {
        Some(m) => {
            if result.scenario == Scenario::Osda {
                println!(
                    "scenario=osda accuracy={:.4} OS={:.4} OS*={:.4} UNK={:.4}",
                    m.overall_accuracy,
                    m.os.unwrap_or(f64::NAN),
                    m.os_star.unwrap_or(f64::NAN),
                    m.unk.unwrap_or(0.0)
                );
            } else {
                println!("scenario=csda accuracy={:.4}", m.overall_accuracy);
            }
        }
        None => println!("scenario={} (no target ground truth)", result.scenario),
    }
}

fn cmd_run(config: &Path, overrides: &RunOverrides) -> Result<(), Error> {
    let mut cfg = load_run_config(config)?;
    apply_overrides(&mut cfg, overrides);
    let result = run_experiment(&cfg)?;
    let out_dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let written = write_artifacts(&result, &out_dir)?;
    print_summary(&result);
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(
    param: &str,
    grid: &str,
    config: &Path,
    overrides: &RunOverrides,
) -> Result<(), Error> {
    let param: SweepParam = param.parse()?;
    let grid: Vec<String> = grid
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect();
    let mut cfg = load_run_config(config)?;
    apply_overrides(&mut cfg, overrides);
    let rows = sweep(param, &grid, &cfg)?;

    let out_dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    for SweepRow { value, result } in &rows {
        let dir = out_dir.join(format!("sweep_{}_{}", param.as_str(), value));
        write_artifacts(result, &dir)?;
    }
    let summary = render_sweep_csv(param, &rows);
    let summary_path = out_dir.join(format!("sweep_{}.csv", param.as_str()));
    std::fs::write(&summary_path, &summary).map_err(|e| Error::io(&summary_path, e))?;
    print!("{summary}");
    println!("wrote {}", summary_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    spec: SyntheticSpec,
    out: &Path,
) -> Result<(), Error> {
    let (source, target) = make_synthetic(&spec)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let fmt = FileFormat::Csv {
        header: false,
        labels: true,
    };
    let source_path = out.join("source.csv");
    let target_path = out.join("target.csv");
    save_features(&source, &source_path, fmt)?;
    save_features(&target, &target_path, fmt)?;

    let scenario = if spec.novel_class_count > 0 { "osda" } else { "csda" };
    let config = format!(
        "# generated by ifcda synth\n\
         scenario = {scenario}\n\
         source_features = {}\n\
         target_features = {}\n\
         format = csv\n\
         csv_header = false\n\
         csv_labels = true\n\
         classes = {}\n\
         seed = {}\n",
        source_path.display(),
        target_path.display(),
        spec.class_count,
        spec.seed,
    );
    let config_path = out.join("experiment.conf");
    std::fs::write(&config_path, config).map_err(|e| Error::io(&config_path, e))?;
    println!(
        "wrote {} ({} samples), {} ({} samples), {}",
        source_path.display(),
        source.len(),
        target_path.display(),
        target.len(),
        config_path.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config, overrides } => cmd_run(config, overrides),
        Command::Sweep {
            param,
            grid,
            config,
            overrides,
        } => cmd_sweep(param, grid, config, overrides),
        Command::Synth {
            classes,
            novel_classes,
            source_samples,
            target_samples,
            dimension,
            mean_shift,
            rotation_deg,
            noise_scale,
            seed,
            out,
        } => cmd_synth(
            SyntheticSpec {
                class_count: *classes,
                novel_class_count: *novel_classes,
                source_samples_per_class: *source_samples,
                target_samples_per_class: *target_samples,
                dimension: *dimension,
                mean_shift: *mean_shift,
                rotation_angle: rotation_deg.to_radians(),
                noise_scale: *noise_scale,
                seed: *seed,
            },
            out,
        ),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(exit_code_for(&err))
        }
    }
}
