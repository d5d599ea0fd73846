//! `acil` — reproducible phased experiments for the analytic
//! class-incremental learner.
//!
//! Four subcommands: `run` executes the phased agenda from a TOML config
//! and writes a JSON report plus the final state file; `verify` re-solves
//! the joint ridge problem on the same expanded features and compares;
//! `sweep` repeats the run across values of one axis; `report` renders a
//! report file for humans (and CSV plotting).
//!
//! Exit codes: 0 success, 2 bad inputs, 3 numerical failure, 4 the
//! verification comparison did not pass. `ACIL_THREADS` caps the
//! evaluation thread pool.

mod config;
mod experiment;
mod failure;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use config::ExperimentConfig;
use experiment::{load_data, run_once, verify_once};
use failure::{Failure, Result};
use report::{
    load_report, print_diff, print_run, print_sweep, print_verify, run_csv, sweep_csv, write_json,
    Aggregate, AnyReport, AxisValue, MeanStd, RunReport, SweepCell, SweepReport, VerifyReport,
    SCHEMA_VERSION,
};

#[derive(Parser)]
#[command(
    name = "acil",
    version,
    about = "Phased experiments for an analytic class-incremental learner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the phased experiment; write a JSON report and the final state
    Run {
        /// Experiment config (TOML)
        #[arg(short, long)]
        config: PathBuf,
        /// Repeat the experiment with different seeds and aggregate
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        /// Comma-separated seed list, one per repeat (default: split.seed
        /// counting upward)
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Re-solve the joint ridge problem and compare with the recursive state
    Verify {
        /// Experiment config (TOML)
        #[arg(short, long)]
        config: PathBuf,
        /// Max-abs tolerance (overrides verify.tolerance from the config)
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Re-run the experiment across values of one axis
    Sweep {
        /// Experiment config (TOML)
        #[arg(short, long)]
        config: PathBuf,
        /// Which knob to vary
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated axis values
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<String>,
        /// Also write the sweep table as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Summarize a report file; optionally emit plot CSV or diff two runs
    Report {
        /// Report JSON written by run, verify, or sweep
        path: PathBuf,
        /// Write per-phase (run) or per-cell (sweep) CSV here
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Second run report to compare against
        #[arg(long)]
        diff: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Axis {
    /// Ridge strength
    Gamma,
    /// Expansion width the classifier head sees
    #[value(alias = "d-fe", alias = "d_fe")]
    Width,
    /// Incremental phase count
    #[value(alias = "k")]
    Phases,
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::Gamma => "gamma",
        Axis::Width => "width",
        Axis::Phases => "phases",
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = configure_threads().and_then(|_| dispatch(cli)) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

/// Honor ACIL_THREADS before any evaluation work spins up the pool.
fn configure_threads() -> Result<()> {
    let raw = match std::env::var("ACIL_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(Failure::validation(format!("ACIL_THREADS: {e}"))),
        Ok(raw) => raw,
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        Failure::validation(format!(
            "ACIL_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::validation(format!("cannot size the evaluation thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            repeat,
            seeds,
        } => cmd_run(&config, repeat, seeds),
        Command::Verify { config, tol } => cmd_verify(&config, tol),
        Command::Sweep {
            config,
            axis,
            values,
            csv,
        } => cmd_sweep(&config, axis, &values, csv.as_deref()),
        Command::Report { path, csv, diff } => cmd_report(&path, csv.as_deref(), diff.as_deref()),
    }
}

fn cmd_run(config_path: &Path, repeat: usize, seeds: Option<Vec<u64>>) -> Result<()> {
    let start = Instant::now();
    if repeat == 0 {
        return Err(Failure::validation("--repeat must be >= 1".to_string()));
    }
    let (config, paths) = ExperimentConfig::load(config_path, false)?;

    // an explicit seed list or repeat > 1 reseeds both the class shuffle
    // and the expansion; a plain run uses the config's seeds
    let overridden = repeat > 1 || seeds.is_some();
    let seeds: Vec<u64> = match seeds {
        Some(list) => {
            if repeat > 1 && list.len() != repeat {
                return Err(Failure::validation(format!(
                    "--seeds lists {} values but --repeat asks for {repeat}",
                    list.len()
                )));
            }
            let mut sorted = list.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != list.len() {
                return Err(Failure::validation(
                    "--seeds contains duplicates".to_string(),
                ));
            }
            list
        }
        None => (0..repeat as u64)
            .map(|i| config.split.seed.wrapping_add(i))
            .collect(),
    };

    let data = load_data(&config, &paths)?;
    create_dir(&paths.output_dir)?;

    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let (split_seed, expansion_seed) = if overridden {
            (seed, seed)
        } else {
            (config.split.seed, config.features.expansion_seed)
        };
        let state_name = if seeds.len() > 1 {
            format!("state_seed{seed}.bin")
        } else {
            "state.bin".to_string()
        };
        runs.push(run_once(
            &config,
            &data,
            split_seed,
            expansion_seed,
            Some(&paths.output_dir.join(state_name)),
        )?);
    }

    let aggregate = (runs.len() > 1).then(|| Aggregate {
        repeats: runs.len(),
        seeds: seeds.clone(),
        average_incremental_accuracy: MeanStd::of(
            &runs
                .iter()
                .map(|r| r.average_incremental_accuracy)
                .collect::<Vec<_>>(),
        ),
        forgetting_magnitude: MeanStd::of(
            &runs
                .iter()
                .map(|r| r.forgetting.magnitude)
                .collect::<Vec<_>>(),
        ),
        final_full_test_accuracy: MeanStd::of(
            &runs
                .iter()
                .map(|r| r.final_full_test_accuracy)
                .collect::<Vec<_>>(),
        ),
    });

    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        command: "run".into(),
        config,
        runs,
        aggregate,
        total_wall_ms: start.elapsed().as_millis() as u64,
    };
    let report_path = paths.output_dir.join("report.json");
    write_json(&report_path, &report)?;
    print_run(&report);
    println!("report: {}", report_path.display());
    Ok(())
}

fn cmd_verify(config_path: &Path, tol: Option<f64>) -> Result<()> {
    let start = Instant::now();
    let (config, paths) = ExperimentConfig::load(config_path, true)?;
    let tolerance = tol.unwrap_or(config.verify.tolerance);
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Failure::validation(format!(
            "--tol must be >= 0 and finite, got {tolerance}"
        )));
    }

    let data = load_data(&config, &paths)?;
    let comparison = verify_once(&config, &data, tolerance)?;
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify".into(),
        config,
        tolerance,
        max_abs: comparison.max_abs,
        rel_frobenius: comparison.rel_frobenius,
        pass: comparison.pass,
        worst_row: comparison.worst.map(|(row, _)| row),
        worst_class: comparison.worst.map(|(_, class)| class),
        wall_ms: start.elapsed().as_millis() as u64,
    };

    create_dir(&paths.output_dir)?;
    let report_path = paths.output_dir.join("verify.json");
    write_json(&report_path, &report)?;
    print_verify(&report);
    println!("report: {}", report_path.display());
    if !report.pass {
        return Err(Failure::verification(format!(
            "recursive state deviates from the joint re-solve by {:.3e} (tolerance {:.3e})",
            report.max_abs, tolerance
        )));
    }
    Ok(())
}

fn cmd_sweep(config_path: &Path, axis: Axis, values: &[String], csv: Option<&Path>) -> Result<()> {
    let start = Instant::now();
    let (config, paths) = ExperimentConfig::load(config_path, false)?;
    let parsed: Vec<AxisValue> = values
        .iter()
        .map(|raw| parse_axis_value(axis, raw))
        .collect::<Result<_>>()?;

    let data = load_data(&config, &paths)?;
    create_dir(&paths.output_dir)?;

    let mut cells = Vec::with_capacity(parsed.len());
    for value in parsed {
        let cell_start = Instant::now();
        let mut cell_config = config.clone();
        apply_axis(&mut cell_config, axis, value);
        // a broken cell (say gamma <= 0) is recorded and the sweep goes on
        let cell = match run_once(
            &cell_config,
            &data,
            config.split.seed,
            config.features.expansion_seed,
            None,
        ) {
            Ok(run) => SweepCell {
                value,
                average_incremental_accuracy: Some(run.average_incremental_accuracy),
                forgetting_signed: Some(run.forgetting.signed),
                forgetting_magnitude: Some(run.forgetting.magnitude),
                final_full_test_accuracy: Some(run.final_full_test_accuracy),
                wall_ms: cell_start.elapsed().as_millis() as u64,
                error: None,
            },
            Err(e) => SweepCell {
                value,
                average_incremental_accuracy: None,
                forgetting_signed: None,
                forgetting_magnitude: None,
                final_full_test_accuracy: None,
                wall_ms: cell_start.elapsed().as_millis() as u64,
                error: Some(e.to_string()),
            },
        };
        cells.push(cell);
    }

    let report = SweepReport {
        schema_version: SCHEMA_VERSION,
        command: "sweep".into(),
        axis: axis_name(axis).into(),
        config,
        cells,
        total_wall_ms: start.elapsed().as_millis() as u64,
    };
    let report_path = paths
        .output_dir
        .join(format!("sweep_{}.json", axis_name(axis)));
    write_json(&report_path, &report)?;
    print_sweep(&report);
    if let Some(csv_path) = csv {
        write_text(csv_path, &sweep_csv(&report))?;
        println!("csv: {}", csv_path.display());
    }
    println!("report: {}", report_path.display());
    Ok(())
}

fn parse_axis_value(axis: Axis, raw: &str) -> Result<AxisValue> {
    match axis {
        Axis::Gamma => raw
            .trim()
            .parse::<f64>()
            .map(AxisValue::Float)
            .map_err(|_| Failure::validation(format!("gamma value {raw:?} is not a number"))),
        Axis::Width | Axis::Phases => raw.trim().parse::<u64>().map(AxisValue::Int).map_err(|_| {
            Failure::validation(format!(
                "{} value {raw:?} is not a non-negative integer",
                axis_name(axis)
            ))
        }),
    }
}

fn apply_axis(config: &mut ExperimentConfig, axis: Axis, value: AxisValue) {
    match (axis, value) {
        (Axis::Gamma, AxisValue::Float(v)) => config.learner.gamma = v,
        (Axis::Width, AxisValue::Int(v)) => config.features.expansion_width = v as usize,
        (Axis::Phases, AxisValue::Int(v)) => config.split.phases = v as usize,
        _ => unreachable!("parse_axis_value pairs value types with axes"),
    }
}

fn cmd_report(path: &Path, csv: Option<&Path>, diff: Option<&Path>) -> Result<()> {
    match load_report(path)? {
        AnyReport::Run(report) => {
            if report.runs.is_empty() {
                return Err(Failure::validation(format!(
                    "report {} has no runs",
                    path.display()
                )));
            }
            print_run(&report);
            if let Some(csv_path) = csv {
                write_text(csv_path, &run_csv(&report))?;
                println!("csv: {}", csv_path.display());
            }
            if let Some(diff_path) = diff {
                let AnyReport::Run(other) = load_report(diff_path)? else {
                    return Err(Failure::validation(
                        "--diff compares two run reports".to_string(),
                    ));
                };
                if other.runs.is_empty() {
                    return Err(Failure::validation(format!(
                        "report {} has no runs",
                        diff_path.display()
                    )));
                }
                print_diff(
                    &path.display().to_string(),
                    &report,
                    &diff_path.display().to_string(),
                    &other,
                );
            }
        }
        AnyReport::Sweep(report) => {
            if diff.is_some() {
                return Err(Failure::validation(
                    "--diff compares two run reports".to_string(),
                ));
            }
            print_sweep(&report);
            if let Some(csv_path) = csv {
                write_text(csv_path, &sweep_csv(&report))?;
                println!("csv: {}", csv_path.display());
            }
        }
        AnyReport::Verify(report) => {
            if csv.is_some() || diff.is_some() {
                return Err(Failure::validation(
                    "verify reports have no per-phase data to export or diff".to_string(),
                ));
            }
            print_verify(&report);
        }
    }
    Ok(())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)
        .map_err(|e| Failure::validation(format!("cannot create {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Failure::validation(format!("cannot write {}: {e}", path.display())))
}
