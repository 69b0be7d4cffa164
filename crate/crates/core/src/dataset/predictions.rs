use std::path::Path;

use super::annotations::{format_boxes, parse_prediction_boxes};
use super::SequenceManifest;
use crate::error::{Error, Result};
use crate::metrics::TrackRun;

/// Writes the run's predictions in the ground-truth line format.
pub fn write_predictions(run: &TrackRun, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = format_boxes(run.frames().iter().map(|f| f.pred.as_ref()));
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a prediction file and pairs it with the manifest's ground truth.
pub fn parse_predictions(path: impl AsRef<Path>, manifest: &SequenceManifest) -> Result<TrackRun> {
    let path = path.as_ref();
    let preds = parse_prediction_boxes(path)?;
    if preds.len() != manifest.groundtruth.len() {
        return Err(Error::Shape(format!(
            "{} has {} predictions but sequence {} has {} frames",
            path.display(),
            preds.len(),
            manifest.id,
            manifest.groundtruth.len()
        )));
    }
    TrackRun::from_boxes(manifest.id.clone(), &manifest.groundtruth, &preds)
}
