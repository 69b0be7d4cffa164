use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::curve_csv;
use crate::dataset::{load_sequence, write_predictions, PreprocessSpec, SequenceManifest};
use crate::error::{Error, Result};
use crate::lowlight::{degrade_sequence, sweep_grid, DegradationParams, SweepSpec};
use crate::metrics::{aggregate, evaluate_run, metrics_csv, write_json_file, EvalConfig, MetricsReport};
use crate::tracker::{ncc_track, NccConfig};

/// Summary of a whole sweep, written as `sweep.json`.
pub const SWEEP_FILE: &str = "sweep.json";
/// Wall-clock metadata, kept apart so the other outputs stay byte-reproducible.
pub const RUN_META_FILE: &str = "run_meta.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepValueResult {
    pub value: f64,
    pub params: DegradationParams,
    /// Aggregate over sequences; absent when any sequence failed.
    pub report: Option<MetricsReport>,
    pub per_sequence: Vec<(String, MetricsReport)>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: String,
    pub preprocess: String,
    pub values: Vec<SweepValueResult>,
}

impl SweepResult {
    pub fn failed(&self) -> Vec<f64> {
        self.values.iter().filter(|v| v.error.is_some()).map(|v| v.value).collect()
    }

    /// `(value, aggregate)` for every value that completed.
    pub fn reports(&self) -> Vec<(f64, &MetricsReport)> {
        self.values
            .iter()
            .filter_map(|v| v.report.as_ref().map(|r| (v.value, r)))
            .collect()
    }
}

/// Directory name for one sweep value, e.g. `noise=40` or `gamma=0.3`.
pub fn value_dir_name(axis: &str, value: f64) -> String {
    format!("{axis}={value}")
}

fn run_sequence(
    manifest: &SequenceManifest,
    params: &DegradationParams,
    preprocess: &PreprocessSpec,
    value_dir: &Path,
) -> Result<MetricsReport> {
    let degraded = degrade_sequence(manifest, params, value_dir.join("corpus").join(&manifest.id))?;
    let init = degraded.groundtruth[0];
    let run = ncc_track(&degraded, init, NccConfig::default(), preprocess)?;
    let preds_dir = value_dir.join("preds");
    std::fs::create_dir_all(&preds_dir).map_err(|e| Error::io(&preds_dir, e))?;
    write_predictions(&run, preds_dir.join(format!("{}.txt", manifest.id)))?;
    evaluate_run(&run, &EvalConfig::default())
}

fn run_value(
    seqs: &[SequenceManifest],
    params: DegradationParams,
    value: f64,
    preprocess: &PreprocessSpec,
    value_dir: &Path,
) -> SweepValueResult {
    // sequences run in parallel; results are collected in sequence-id order
    let results: Vec<Result<MetricsReport>> = seqs
        .par_iter()
        .map(|m| run_sequence(m, &params, preprocess, value_dir))
        .collect();
    let mut per_sequence = Vec::new();
    let mut errors = Vec::new();
    for (m, r) in seqs.iter().zip(results) {
        match r {
            Ok(report) => per_sequence.push((m.id.clone(), report)),
            Err(e) => errors.push(format!("{}: {e}", m.id)),
        }
    }
    let mut out = SweepValueResult {
        value,
        params,
        report: None,
        per_sequence,
        error: None,
    };
    if !errors.is_empty() {
        out.error = Some(errors.join("; "));
        return out;
    }
    let written = aggregate(&out.per_sequence.iter().map(|(_, r)| r.clone()).collect::<Vec<_>>()).and_then(|all| {
        write_json_file(&all, &value_dir.join("report.json"))?;
        let csv_path = value_dir.join("metrics.csv");
        std::fs::write(&csv_path, metrics_csv(&out.per_sequence, &all)?).map_err(|e| Error::io(&csv_path, e))?;
        Ok(all)
    });
    match written {
        Ok(all) => out.report = Some(all),
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

/// Runs degrade, (optional) preprocess, track and eval for every sweep value.
///
/// Layout under `out_dir`:
/// `<axis>=<value>/corpus/<seq>/` degraded frames, `<axis>=<value>/preds/<seq>.txt`,
/// `<axis>=<value>/report.json` and `metrics.csv`, then `curves_<axis>.csv`,
/// `sweep.json` and `run_meta.json` at the top. Values are processed in
/// ascending order. A failing value is recorded in the result rather than
/// aborting the sweep.
pub fn cmd_sweep(
    seq_dirs: &[PathBuf],
    spec: &SweepSpec,
    preprocess: &PreprocessSpec,
    out_dir: impl AsRef<Path>,
    seed: u64,
) -> Result<SweepResult> {
    if seq_dirs.is_empty() {
        return Err(Error::Usage("sweep needs at least one sequence".into()));
    }
    preprocess.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let mut spec = spec.clone();
    spec.defaults.seed = seed;
    spec.values.sort_by(f64::total_cmp);
    spec.values.dedup();
    let grid = sweep_grid(&spec).map_err(|e| Error::Usage(e.to_string()))?;

    let mut seqs = seq_dirs.iter().map(load_sequence).collect::<Result<Vec<_>>>()?;
    seqs.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = seqs.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::Usage(format!("duplicate sequence id {}", w[0].id)));
    }

    let out_dir = out_dir.as_ref();
    let axis = spec.axis.name();
    let mut values = Vec::with_capacity(grid.len());
    for (&value, params) in spec.values.iter().zip(grid) {
        let value_dir = out_dir.join(value_dir_name(axis, value));
        let result = match std::fs::create_dir_all(&value_dir) {
            Ok(()) => run_value(&seqs, params, value, preprocess, &value_dir),
            Err(e) => SweepValueResult {
                value,
                params,
                report: None,
                per_sequence: Vec::new(),
                error: Some(Error::io(&value_dir, e).to_string()),
            },
        };
        values.push(result);
    }
    let result = SweepResult {
        axis: axis.to_string(),
        preprocess: preprocess.to_string(),
        values,
    };

    let curves = curve_csv(&result.reports())?;
    let curves_path = out_dir.join(format!("curves_{axis}.csv"));
    std::fs::write(&curves_path, curves).map_err(|e| Error::io(&curves_path, e))?;
    let sweep_path = out_dir.join(SWEEP_FILE);
    let json = serde_json::to_string_pretty(&result).map_err(|e| Error::Other(e.to_string()))?;
    std::fs::write(&sweep_path, json + "\n").map_err(|e| Error::io(&sweep_path, e))?;
    write_run_meta(out_dir, seq_dirs)?;
    Ok(result)
}

fn write_run_meta(out_dir: &Path, seq_dirs: &[PathBuf]) -> Result<()> {
    let started = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "finished_unix_secs": started,
        "version": env!("CARGO_PKG_VERSION"),
        "sequences": seq_dirs,
    });
    let path = out_dir.join(RUN_META_FILE);
    std::fs::write(&path, format!("{meta:#}\n")).map_err(|e| Error::io(&path, e))
}

