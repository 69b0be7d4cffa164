use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dataset::{load_sequence, parse_predictions, write_predictions, PreprocessSpec};
use crate::error::{Error, Result};
use crate::lowlight::{degrade_sequence, Config, DegradationParams};
use crate::metrics::{evaluate_run, metrics_csv, write_json_file, EvalConfig, MetricsReport};
use crate::tracker::{ncc_track, NccConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradeSummary {
    pub sequence: String,
    pub frames: usize,
    pub out_dir: PathBuf,
    pub params: DegradationParams,
}

/// Degrades the sequence in `in_dir` into `out_dir` with the model read from
/// `config` and noise drawn from `seed`.
///
/// Every model key must be present in the config; the seed always comes from the caller.
pub fn cmd_degrade(
    in_dir: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
    config: impl AsRef<Path>,
    seed: u64,
) -> Result<DegradeSummary> {
    let cfg = Config::load(config)?;
    let params = DegradationParams::from_config(&cfg)?.with_seed(seed);
    let manifest = load_sequence(in_dir)?;
    let out = degrade_sequence(&manifest, &params, out_dir.as_ref())?;
    Ok(DegradeSummary {
        sequence: out.id,
        frames: out.frames.len(),
        out_dir: out.dir,
        params,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackSummary {
    pub sequence: String,
    pub frames: usize,
    /// Frames where the tracker reported no box.
    pub failures: usize,
    pub preprocess: String,
    pub out_path: PathBuf,
}

/// Runs the NCC baseline over a sequence, initialized from the first
/// ground-truth box, and writes the prediction file.
pub fn cmd_track(
    seq_dir: impl AsRef<Path>,
    preprocess: &PreprocessSpec,
    out_path: impl AsRef<Path>,
    cfg: NccConfig,
) -> Result<TrackSummary> {
    preprocess.validate()?;
    let manifest = load_sequence(seq_dir)?;
    let init = manifest.groundtruth[0];
    let run = ncc_track(&manifest, init, cfg, preprocess)?;
    let out_path = out_path.as_ref();
    if let Some(parent) = out_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    write_predictions(&run, out_path)?;
    Ok(TrackSummary {
        sequence: manifest.id,
        frames: run.len(),
        failures: run.frames().iter().filter(|f| f.pred.is_none()).count(),
        preprocess: preprocess.to_string(),
        out_path: out_path.to_path_buf(),
    })
}

/// Evaluation result with its CSV rendering (one row for the sequence plus `ALL`).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutput {
    pub sequence: String,
    pub report: MetricsReport,
    pub csv: String,
}

impl EvalOutput {
    /// Writes `report.json` and `metrics.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_json_file(&self.report, &dir.join("report.json"))?;
        let csv_path = dir.join("metrics.csv");
        std::fs::write(&csv_path, &self.csv).map_err(|e| Error::io(&csv_path, e))
    }
}

pub fn cmd_eval(seq_dir: impl AsRef<Path>, pred_path: impl AsRef<Path>, cfg: &EvalConfig) -> Result<EvalOutput> {
    if !(cfg.d_px.is_finite() && cfg.d_px >= 0.0 && cfg.d_norm.is_finite() && cfg.d_norm >= 0.0) {
        return Err(Error::Usage(format!(
            "thresholds must be non-negative, got d_px={} d_norm={}",
            cfg.d_px, cfg.d_norm
        )));
    }
    let manifest = load_sequence(seq_dir)?;
    let run = parse_predictions(pred_path, &manifest)?;
    let report = evaluate_run(&run, cfg)?;
    let csv = metrics_csv(&[(manifest.id.clone(), report.clone())], &report)?;
    Ok(EvalOutput {
        sequence: manifest.id,
        report,
        csv,
    })
}
