use serde::{Deserialize, Serialize};

use super::run::TrackRun;
use crate::error::{Error, Result};

/// A sampled threshold curve; `values` are fractions in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
}

impl Curve {
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// Trapezoidal integral over the sampled thresholds.
    pub fn trapezoid(&self) -> f64 {
        self.thresholds
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| (t[1] - t[0]) * (v[0] + v[1]) / 2.0)
            .sum()
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn check_sorted(thresholds: &[f64]) -> Result<()> {
    if thresholds.windows(2).any(|w| w[0].is_nan() || w[1].is_nan() || w[0] > w[1]) {
        return Err(Error::Param("thresholds must be sorted ascending".into()));
    }
    Ok(())
}

fn fraction(values: &[f64], mut pass: impl FnMut(f64) -> bool) -> f64 {
    values.iter().filter(|v| pass(**v)).count() as f64 / values.len() as f64
}

/// Fraction of frames with `IoU >= t` for each threshold.
pub fn success_curve(run: &TrackRun, thresholds: &[f64]) -> Result<Curve> {
    check_sorted(thresholds)?;
    let ious = run.ious()?;
    Ok(Curve {
        thresholds: thresholds.to_vec(),
        values: thresholds.iter().map(|&t| fraction(&ious, |v| v >= t)).collect(),
    })
}

/// Fraction of frames with center distance `<= d` for each threshold (pixels).
pub fn precision_curve(run: &TrackRun, thresholds: &[f64]) -> Result<Curve> {
    check_sorted(thresholds)?;
    let dists = run.center_distances();
    Ok(Curve {
        thresholds: thresholds.to_vec(),
        values: thresholds.iter().map(|&d| fraction(&dists, |v| v <= d)).collect(),
    })
}

/// Fraction of frames with normalized center distance `<= d` for each threshold.
pub fn norm_precision_curve(run: &TrackRun, thresholds: &[f64]) -> Result<Curve> {
    check_sorted(thresholds)?;
    let dists = run.normalized_distances()?;
    Ok(Curve {
        thresholds: thresholds.to_vec(),
        values: thresholds.iter().map(|&d| fraction(&dists, |v| v <= d)).collect(),
    })
}

/// Area under the success curve in percent, in closed form: the integral over
/// `t` in `[0, 1]` of `1[IoU >= t]` is the IoU itself, so AUC is the mean IoU.
pub fn auc(run: &TrackRun) -> Result<f64> {
    let ious = run.ious()?;
    Ok(100.0 * ious.iter().sum::<f64>() / ious.len() as f64)
}

/// AUC in percent by trapezoidal quadrature over `n` evenly spaced thresholds.
pub fn auc_quadrature(run: &TrackRun, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Param("quadrature needs at least two thresholds".into()));
    }
    Ok(100.0 * success_curve(run, &linspace(0.0, 1.0, n))?.trapezoid())
}

/// Percent of frames with `IoU >= t`.
pub fn overlap_precision(run: &TrackRun, t: f64) -> Result<f64> {
    Ok(100.0 * fraction(&run.ious()?, |v| v >= t))
}

/// Percent of frames whose center distance is at most `d` pixels.
pub fn precision_at(run: &TrackRun, d: f64) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(Error::Param(format!("distance threshold must be >= 0, got {d}")));
    }
    Ok(100.0 * fraction(&run.center_distances(), |v| v <= d))
}

/// Percent of frames whose normalized center distance is at most `d`.
pub fn norm_precision_at(run: &TrackRun, d: f64) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(Error::Param(format!("distance threshold must be >= 0, got {d}")));
    }
    Ok(100.0 * fraction(&run.normalized_distances()?, |v| v <= d))
}
