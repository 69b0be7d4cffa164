use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lowlight::SweepAxis;
use crate::metrics::{write_scalar_csv, MetricsReport};

/// Header of the table CSV.
pub const TABLE_COLUMNS: [&str; 6] = ["config", "auc", "op50", "op75", "precision", "norm_precision"];
/// Header of the long-format curve CSVs.
pub const CURVE_COLUMNS: [&str; 3] = ["value", "metric", "score"];

const METRICS: [&str; 5] = ["auc", "op50", "op75", "precision", "norm_precision"];

/// Files written by [`cmd_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub table: PathBuf,
    pub curves: Vec<PathBuf>,
    /// Number of configurations found.
    pub rows: usize,
}

/// Long-format curve CSV: for every metric, one row per swept value in ascending order.
pub fn curve_csv(points: &[(f64, &MetricsReport)]) -> Result<String> {
    let mut points = points.to_vec();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Other(format!("writing CSV: {e}"));
    w.write_record(CURVE_COLUMNS).map_err(err)?;
    for (m, name) in METRICS.iter().enumerate() {
        for (value, report) in &points {
            w.write_record([value.to_string(), name.to_string(), format!("{:.4}", report.scalars()[m])])
                .map_err(err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Other(format!("writing CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

/// Table CSV with one row per named configuration.
pub fn table_csv(rows: &[(String, &MetricsReport)]) -> Result<String> {
    let mut buf = Vec::new();
    write_scalar_csv(&mut buf, TABLE_COLUMNS[0], rows)?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

struct Entry {
    prefix: String,
    axis: SweepAxis,
    value: f64,
    report: MetricsReport,
}

/// `<axis>=<value>` directories holding a `report.json`.
fn scan(dir: &Path, prefix: &str, out: &mut Vec<Entry>) -> Result<bool> {
    let mut found_sweep_dirs = false;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    for path in entries {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let Some((axis, value)) = name.split_once('=') else {
            continue;
        };
        let (Ok(axis), Ok(value)) = (axis.parse::<SweepAxis>(), value.parse::<f64>()) else {
            continue;
        };
        let report_path = path.join("report.json");
        if !report_path.is_file() {
            continue;
        }
        let text = std::fs::read_to_string(&report_path).map_err(|e| Error::io(&report_path, e))?;
        let report = MetricsReport::from_json(&text).map_err(|e| Error::Load {
            path: report_path.clone(),
            msg: e.to_string(),
        })?;
        found_sweep_dirs = true;
        out.push(Entry {
            prefix: prefix.to_string(),
            axis,
            value,
            report,
        });
    }
    Ok(found_sweep_dirs)
}

/// Collects finished sweep values under `results_dir` (directly, or one level
/// down for several sweeps side by side) and writes `table.csv` plus one
/// `curves_<axis>.csv` per sweep and axis.
pub fn cmd_report(results_dir: impl AsRef<Path>) -> Result<ReportFiles> {
    let root = results_dir.as_ref();
    if !root.is_dir() {
        return Err(Error::Other(format!("{}: results directory does not exist", root.display())));
    }
    let mut entries = Vec::new();
    scan(root, "", &mut entries)?;
    let mut children: Vec<PathBuf> = std::fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && !p.file_name().unwrap_or_default().to_string_lossy().contains('='))
        .collect();
    children.sort();
    for child in children {
        let prefix = child.file_name().unwrap_or_default().to_string_lossy().into_owned();
        scan(&child, &prefix, &mut entries)?;
    }
    if entries.is_empty() {
        return Err(Error::Other(format!(
            "{}: no sweep results (<axis>=<value>/report.json) found",
            root.display()
        )));
    }
    entries.sort_by(|a, b| {
        (&a.prefix, a.axis.name())
            .cmp(&(&b.prefix, b.axis.name()))
            .then(a.value.total_cmp(&b.value))
    });

    let config_name = |e: &Entry| {
        let base = format!("{}={}", e.axis.name(), e.value);
        if e.prefix.is_empty() {
            base
        } else {
            format!("{}/{base}", e.prefix)
        }
    };
    let rows: Vec<(String, &MetricsReport)> = entries.iter().map(|e| (config_name(e), &e.report)).collect();
    let table = root.join("table.csv");
    std::fs::write(&table, table_csv(&rows)?).map_err(|e| Error::io(&table, e))?;

    let mut groups: BTreeMap<(String, &'static str), Vec<(f64, &MetricsReport)>> = BTreeMap::new();
    for e in &entries {
        groups
            .entry((e.prefix.clone(), e.axis.name()))
            .or_default()
            .push((e.value, &e.report));
    }
    let mut curves = Vec::new();
    for ((prefix, axis), points) in groups {
        let name = if prefix.is_empty() {
            format!("curves_{axis}.csv")
        } else {
            format!("curves_{prefix}_{axis}.csv")
        };
        let path = root.join(name);
        std::fs::write(&path, curve_csv(&points)?).map_err(|e| Error::io(&path, e))?;
        curves.push(path);
    }
    Ok(ReportFiles {
        table,
        curves,
        rows: rows.len(),
    })
}
