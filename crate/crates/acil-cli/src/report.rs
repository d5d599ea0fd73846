//! Report payloads and their renderings.
//!
//! Every command that produces results writes one JSON document with a
//! `schema_version` and a `command` discriminator. Payloads are fully
//! determined by the config and input files except for the `*wall_ms`
//! timing fields, so two runs of the same experiment can be compared
//! byte-for-byte after blanking those.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::failure::{Failure, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// `acil run`: one entry per repeat, plus mean/stddev when there are
/// several.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub config: ExperimentConfig,
    pub runs: Vec<SingleRun>,
    pub aggregate: Option<Aggregate>,
    pub total_wall_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleRun {
    pub split_seed: u64,
    pub expansion_seed: u64,
    pub phases: Vec<PhaseEntry>,
    pub average_incremental_accuracy: f64,
    pub forgetting: ForgettingEntry,
    /// Accuracy of the final model on every test row, trained classes or
    /// not; equals the last phase's `accuracy_seen` when the test split
    /// carries exactly the training classes.
    pub final_full_test_accuracy: f64,
    pub state: Option<StateInfo>,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseEntry {
    pub phase: usize,
    pub new_classes: Vec<u32>,
    pub train_rows: usize,
    /// Test rows belonging to classes seen so far.
    pub test_rows: usize,
    /// Accuracy on the test union of all classes seen so far.
    pub accuracy_seen: f64,
    /// Accuracy on the base phase's test rows — the forgetting probe.
    pub accuracy_base: f64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForgettingEntry {
    pub signed: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateInfo {
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub repeats: usize,
    pub seeds: Vec<u64>,
    pub average_incremental_accuracy: MeanStd,
    pub forgetting_magnitude: MeanStd,
    pub final_full_test_accuracy: MeanStd,
}

/// Population mean and standard deviation (divisor n, not n−1), so a
/// single repeat reports stddev 0 rather than NaN.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub stddev: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        MeanStd {
            mean,
            stddev: var.sqrt(),
        }
    }
}

/// `acil verify`: the recursive-vs-joint comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: String,
    pub config: ExperimentConfig,
    pub tolerance: f64,
    pub max_abs: f64,
    pub rel_frobenius: f64,
    pub pass: bool,
    pub worst_row: Option<usize>,
    pub worst_class: Option<u32>,
    pub wall_ms: u64,
}

/// `acil sweep`: one summary cell per axis value; a failed cell records
/// its error and the sweep keeps going.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub command: String,
    pub axis: String,
    pub config: ExperimentConfig,
    pub cells: Vec<SweepCell>,
    pub total_wall_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub value: AxisValue,
    pub average_incremental_accuracy: Option<f64>,
    pub forgetting_signed: Option<f64>,
    pub forgetting_magnitude: Option<f64>,
    pub final_full_test_accuracy: Option<f64>,
    pub wall_ms: u64,
    pub error: Option<String>,
}

/// Axis values keep their natural JSON type: integers for widths and phase
/// counts, floats for ridge strengths.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Int(u64),
    Float(f64),
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Int(v) => write!(f, "{v}"),
            AxisValue::Float(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug)]
pub enum AnyReport {
    Run(RunReport),
    Verify(VerifyReport),
    Sweep(SweepReport),
}

pub fn write_json<T: Serialize>(path: &Path, payload: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(payload)
        .map_err(|e| Failure::validation(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| Failure::validation(format!("cannot write {}: {e}", path.display())))
}

/// Load any report, dispatching on its `command` field.
pub fn load_report(path: &Path) -> Result<AnyReport> {
    #[derive(Deserialize)]
    struct Envelope {
        schema_version: u32,
        command: String,
    }

    let text = fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("cannot read report {}: {e}", path.display())))?;
    let parse_err = |e: serde_json::Error| {
        Failure::validation(format!("cannot parse report {}: {e}", path.display()))
    };
    let envelope: Envelope = serde_json::from_str(&text).map_err(parse_err)?;
    if envelope.schema_version != SCHEMA_VERSION {
        return Err(Failure::validation(format!(
            "report {} has schema_version {}, this build reads {}",
            path.display(),
            envelope.schema_version,
            SCHEMA_VERSION
        )));
    }
    match envelope.command.as_str() {
        "run" => Ok(AnyReport::Run(
            serde_json::from_str(&text).map_err(parse_err)?,
        )),
        "verify" => Ok(AnyReport::Verify(
            serde_json::from_str(&text).map_err(parse_err)?,
        )),
        "sweep" => Ok(AnyReport::Sweep(
            serde_json::from_str(&text).map_err(parse_err)?,
        )),
        other => Err(Failure::validation(format!(
            "report {} has unknown command {other:?}",
            path.display()
        ))),
    }
}

/// Per-phase plot data: one row per (run, phase).
pub fn run_csv(report: &RunReport) -> String {
    let mut out = String::from("seed,phase,accuracy_seen,accuracy_base\n");
    for run in &report.runs {
        for p in &run.phases {
            out.push_str(&format!(
                "{},{},{},{}\n",
                run.split_seed, p.phase, p.accuracy_seen, p.accuracy_base
            ));
        }
    }
    out
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(
        "value,average_incremental_accuracy,forgetting_signed,forgetting_magnitude,final_full_test_accuracy,error\n",
    );
    for cell in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell.value,
            fmt_opt_raw(cell.average_incremental_accuracy),
            fmt_opt_raw(cell.forgetting_signed),
            fmt_opt_raw(cell.forgetting_magnitude),
            fmt_opt_raw(cell.final_full_test_accuracy),
            csv_quote(cell.error.as_deref().unwrap_or("")),
        ));
    }
    out
}

fn fmt_opt_raw(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn print_run(report: &RunReport) {
    for run in &report.runs {
        if report.runs.len() > 1 {
            println!("run with seed {}:", run.split_seed);
        }
        println!("  phase  new-classes  train-rows  test-rows  seen-acc  base-acc");
        for p in &run.phases {
            println!(
                "  {:>5}  {:>11}  {:>10}  {:>9}  {:>8.6}  {:>8.6}",
                p.phase,
                p.new_classes.len(),
                p.train_rows,
                p.test_rows,
                p.accuracy_seen,
                p.accuracy_base
            );
        }
        println!(
            "  average incremental accuracy: {:.6}",
            run.average_incremental_accuracy
        );
        println!(
            "  forgetting: {:+.6} (magnitude {:.6})",
            run.forgetting.signed, run.forgetting.magnitude
        );
        println!(
            "  final full-test accuracy: {:.6}",
            run.final_full_test_accuracy
        );
        if let Some(state) = &run.state {
            println!("  state: {} ({} bytes)", state.path, state.bytes);
        }
    }
    if let Some(agg) = &report.aggregate {
        println!("aggregate over {} seeds {:?}:", agg.repeats, agg.seeds);
        println!(
            "  average incremental accuracy: {:.6} +- {:.6}",
            agg.average_incremental_accuracy.mean, agg.average_incremental_accuracy.stddev
        );
        println!(
            "  forgetting magnitude: {:.6} +- {:.6}",
            agg.forgetting_magnitude.mean, agg.forgetting_magnitude.stddev
        );
        println!(
            "  final full-test accuracy: {:.6} +- {:.6}",
            agg.final_full_test_accuracy.mean, agg.final_full_test_accuracy.stddev
        );
    }
}

pub fn print_verify(report: &VerifyReport) {
    println!(
        "verification {}: max-abs {:.3e} (tolerance {:.3e}), relative frobenius {:.3e}",
        if report.pass { "PASS" } else { "FAIL" },
        report.max_abs,
        report.tolerance,
        report.rel_frobenius
    );
    if let (Some(row), Some(class)) = (report.worst_row, report.worst_class) {
        println!("  worst entry: feature {row}, class {class}");
    }
}

pub fn print_sweep(report: &SweepReport) {
    println!("sweep over {}:", report.axis);
    println!("  value         avg-acc   forgetting  final-acc");
    for cell in &report.cells {
        match &cell.error {
            Some(err) => println!("  {:<12}  failed: {err}", cell.value.to_string()),
            None => println!(
                "  {:<12}  {:>8}  {:>10}  {:>9}",
                cell.value.to_string(),
                fmt_opt(cell.average_incremental_accuracy),
                fmt_opt_signed(cell.forgetting_signed),
                fmt_opt(cell.final_full_test_accuracy),
            ),
        }
    }
}

/// Side-by-side comparison of two run reports (first run of each).
pub fn print_diff(a_path: &str, a: &RunReport, b_path: &str, b: &RunReport) {
    let ra = &a.runs[0];
    let rb = &b.runs[0];
    println!("diff: A = {a_path}, B = {b_path}");
    if a.runs.len() > 1 || b.runs.len() > 1 {
        println!("  (multi-seed reports: comparing the first run of each)");
    }
    println!("  phase  A-seen    B-seen    delta      A-base    B-base    delta");
    let n = ra.phases.len().max(rb.phases.len());
    for k in 0..n {
        let pa = ra.phases.get(k);
        let pb = rb.phases.get(k);
        println!(
            "  {:>5}  {:>8}  {:>8}  {:>9}  {:>8}  {:>8}  {:>9}",
            k,
            fmt_opt(pa.map(|p| p.accuracy_seen)),
            fmt_opt(pb.map(|p| p.accuracy_seen)),
            fmt_opt_signed(delta(
                pa.map(|p| p.accuracy_seen),
                pb.map(|p| p.accuracy_seen)
            )),
            fmt_opt(pa.map(|p| p.accuracy_base)),
            fmt_opt(pb.map(|p| p.accuracy_base)),
            fmt_opt_signed(delta(
                pa.map(|p| p.accuracy_base),
                pb.map(|p| p.accuracy_base)
            )),
        );
    }
    println!(
        "  average incremental accuracy: {:.6} vs {:.6} (delta {:+.6})",
        ra.average_incremental_accuracy,
        rb.average_incremental_accuracy,
        rb.average_incremental_accuracy - ra.average_incremental_accuracy
    );
    println!(
        "  forgetting (signed): {:+.6} vs {:+.6} (delta {:+.6})",
        ra.forgetting.signed,
        rb.forgetting.signed,
        rb.forgetting.signed - ra.forgetting.signed
    );
}

fn delta(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into())
}

fn fmt_opt_signed(v: Option<f64>) -> String {
    v.map(|v| format!("{v:+.6}")).unwrap_or_else(|| "-".into())
}
