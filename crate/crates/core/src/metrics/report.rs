use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::curves::{
    auc, linspace, norm_precision_at, norm_precision_curve, overlap_precision, precision_at,
    precision_curve, success_curve, Curve,
};
use super::run::TrackRun;
use crate::error::{Error, Result};

/// Column header of the flat CSV report.
pub const CSV_COLUMNS: [&str; 6] = ["sequence", "auc", "op50", "op75", "precision", "norm_precision"];

/// Upper end of the emitted precision curve, in pixels.
pub const PRECISION_CURVE_MAX_PX: f64 = 50.0;
/// Upper end of the emitted normalized precision curve.
pub const NORM_PRECISION_CURVE_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Pixel threshold for precision.
    pub d_px: f64,
    /// Threshold for normalized precision.
    pub d_norm: f64,
    /// Number of evenly spaced thresholds per emitted curve.
    pub curve_resolution: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            d_px: 20.0,
            d_norm: 0.5,
            curve_resolution: 101,
        }
    }
}

/// Scalar metrics in percent plus the three threshold curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub auc: f64,
    pub op50: f64,
    pub op75: f64,
    pub precision: f64,
    pub norm_precision: f64,
    pub success_curve: Curve,
    pub precision_curve: Curve,
    pub norm_precision_curve: Curve,
}

impl MetricsReport {
    pub fn scalars(&self) -> [f64; 5] {
        [self.auc, self.op50, self.op75, self.precision, self.norm_precision]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Other(format!("invalid report JSON: {e}")))
    }
}

pub fn evaluate_run(run: &TrackRun, cfg: &EvalConfig) -> Result<MetricsReport> {
    if cfg.curve_resolution < 2 {
        return Err(Error::Param("curve resolution must be at least 2".into()));
    }
    let n = cfg.curve_resolution;
    Ok(MetricsReport {
        auc: auc(run)?,
        op50: overlap_precision(run, 0.5)?,
        op75: overlap_precision(run, 0.75)?,
        precision: precision_at(run, cfg.d_px)?,
        norm_precision: norm_precision_at(run, cfg.d_norm)?,
        success_curve: success_curve(run, &linspace(0.0, 1.0, n))?,
        precision_curve: precision_curve(run, &linspace(0.0, PRECISION_CURVE_MAX_PX, n))?,
        norm_precision_curve: norm_precision_curve(run, &linspace(0.0, NORM_PRECISION_CURVE_MAX, n))?,
    })
}

fn mean_curve(curves: &[&Curve]) -> Result<Curve> {
    let first = curves[0];
    if curves.iter().any(|c| c.thresholds != first.thresholds) {
        return Err(Error::Shape("cannot average curves sampled at different thresholds".into()));
    }
    let k = curves.len() as f64;
    let values = (0..first.len())
        .map(|i| curves.iter().map(|c| c.values[i]).sum::<f64>() / k)
        .collect();
    Ok(Curve {
        thresholds: first.thresholds.clone(),
        values,
    })
}

/// Benchmark-level report: every field is the unweighted mean over sequences,
/// folded in the order given.
pub fn aggregate(reports: &[MetricsReport]) -> Result<MetricsReport> {
    if reports.is_empty() {
        return Err(Error::Param("nothing to aggregate".into()));
    }
    let k = reports.len() as f64;
    let mean = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
    let curves = |f: fn(&MetricsReport) -> &Curve| mean_curve(&reports.iter().map(f).collect::<Vec<_>>());
    Ok(MetricsReport {
        auc: mean(|r| r.auc),
        op50: mean(|r| r.op50),
        op75: mean(|r| r.op75),
        precision: mean(|r| r.precision),
        norm_precision: mean(|r| r.norm_precision),
        success_curve: curves(|r| &r.success_curve)?,
        precision_curve: curves(|r| &r.precision_curve)?,
        norm_precision_curve: curves(|r| &r.norm_precision_curve)?,
    })
}

/// Writes one CSV row per `(name, report)` under the given first-column header.
pub fn write_scalar_csv<W: Write>(
    out: W,
    first_column: &str,
    rows: &[(String, &MetricsReport)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = CSV_COLUMNS.to_vec();
    header[0] = first_column;
    let csv_err = |e: csv::Error| Error::Other(format!("writing CSV: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for (name, r) in rows {
        let mut record = vec![name.clone()];
        record.extend(r.scalars().iter().map(|v| format!("{v:.4}")));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Other(format!("writing CSV: {e}")))?;
    Ok(())
}

/// Per-sequence rows followed by an `ALL` row holding the aggregate.
pub fn metrics_csv(per_sequence: &[(String, MetricsReport)], all: &MetricsReport) -> Result<String> {
    let mut rows: Vec<(String, &MetricsReport)> = per_sequence.iter().map(|(n, r)| (n.clone(), r)).collect();
    rows.push(("ALL".to_string(), all));
    let mut buf = Vec::new();
    write_scalar_csv(&mut buf, "sequence", &rows)?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

pub fn write_json_file(report: &MetricsReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json() + "\n").map_err(|e| Error::io(path, e))
}
