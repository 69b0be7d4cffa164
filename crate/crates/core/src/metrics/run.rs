use serde::{Deserialize, Serialize};

use super::bbox::{center_distance, iou, normalized_distance, BoundingBox};
use crate::error::{Error, Result};

/// Ground truth and tracker output for one frame; `pred` is `None` when the tracker lost the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramePair {
    pub gt: BoundingBox,
    pub pred: Option<BoundingBox>,
}

/// Per-frame box pairs for one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRun {
    sequence: String,
    frames: Vec<FramePair>,
}

impl TrackRun {
    pub fn new(sequence: impl Into<String>, frames: Vec<FramePair>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Param("a track run needs at least one frame".into()));
        }
        Ok(TrackRun {
            sequence: sequence.into(),
            frames,
        })
    }

    /// Pairs ground truth with predictions; the two lists must have equal length.
    pub fn from_boxes(
        sequence: impl Into<String>,
        gt: &[BoundingBox],
        pred: &[Option<BoundingBox>],
    ) -> Result<Self> {
        if gt.len() != pred.len() {
            return Err(Error::Shape(format!(
                "{} ground-truth boxes but {} predictions",
                gt.len(),
                pred.len()
            )));
        }
        let frames = gt
            .iter()
            .zip(pred)
            .map(|(gt, pred)| FramePair { gt: *gt, pred: *pred })
            .collect();
        Self::new(sequence, frames)
    }

    pub fn sequence(&self) -> &str {
        &self.sequence
    }

    pub fn frames(&self) -> &[FramePair] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn predictions(&self) -> Vec<Option<BoundingBox>> {
        self.frames.iter().map(|f| f.pred).collect()
    }

    /// Per-frame IoU; lost frames score 0.
    pub fn ious(&self) -> Result<Vec<f64>> {
        self.frames
            .iter()
            .enumerate()
            .map(|(i, f)| match &f.pred {
                Some(p) => iou(&f.gt, p).map_err(|e| Error::at_frame(i, e)),
                None => Ok(0.0),
            })
            .collect()
    }

    /// Per-frame center distance in pixels; lost frames are infinitely far.
    pub fn center_distances(&self) -> Vec<f64> {
        self.frames
            .iter()
            .map(|f| match &f.pred {
                Some(p) => center_distance(&f.gt, p),
                None => f64::INFINITY,
            })
            .collect()
    }

    /// Per-frame normalized distance; errors name the first frame with a zero-diagonal ground truth.
    pub fn normalized_distances(&self) -> Result<Vec<f64>> {
        self.frames
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if f.gt.diagonal() <= 0.0 {
                    return Err(Error::at_frame(
                        i,
                        Error::UndefinedMetric(format!("ground-truth box {:?} has zero diagonal", f.gt)),
                    ));
                }
                match &f.pred {
                    Some(p) => normalized_distance(&f.gt, p),
                    None => Ok(f64::INFINITY),
                }
            })
            .collect()
    }
}
