use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::annotations::parse_groundtruth;
use crate::error::{Error, Result};
use crate::metrics::BoundingBox;
use crate::pixel::{image_dimensions, read_image, FrameFormat, Image};

/// Annotation file name inside a sequence directory.
pub const GROUNDTRUTH_FILE: &str = "groundtruth.txt";

/// A sequence directory: numerically ordered frames plus one ground-truth box per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceManifest {
    pub id: String,
    pub dir: PathBuf,
    pub frames: Vec<PathBuf>,
    pub groundtruth: Vec<BoundingBox>,
    pub width: usize,
    pub height: usize,
}

impl SequenceManifest {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Reads frame `index`, attaching the index to any error.
    pub fn read_frame(&self, index: usize) -> Result<Image> {
        let path = self
            .frames
            .get(index)
            .ok_or_else(|| Error::at_frame(index, Error::Other("frame index out of range".into())))?;
        let img = read_image(path).map_err(|e| Error::at_frame(index, e))?;
        if (img.width(), img.height()) != (self.width, self.height) {
            return Err(Error::at_frame(
                index,
                Error::Shape(format!(
                    "{} is {}x{}, sequence frames are {}x{}",
                    path.display(),
                    img.width(),
                    img.height(),
                    self.width,
                    self.height
                )),
            ));
        }
        Ok(img)
    }
}

fn load_err(dir: &Path, msg: impl Into<String>) -> Error {
    Error::Load {
        path: dir.to_path_buf(),
        msg: msg.into(),
    }
}

/// Lists PNG/PPM frames in `dir` ordered by the numeric value of their file stem.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut frames = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() || FrameFormat::from_path(&path).is_none() {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let number: u64 = stem
            .parse()
            .map_err(|_| load_err(dir, format!("frame file {} is not numerically named", path.display())))?;
        frames.push((number, path));
    }
    frames.sort();
    if let Some(w) = frames.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(load_err(dir, format!("duplicate frame number {}", w[0].0)));
    }
    Ok(frames.into_iter().map(|(_, p)| p).collect())
}

/// Loads a sequence directory with frames and `groundtruth.txt`, checking counts.
pub fn load_sequence(dir: impl AsRef<Path>) -> Result<SequenceManifest> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(load_err(dir, "not a directory"));
    }
    let gt_path = dir.join(GROUNDTRUTH_FILE);
    if !gt_path.is_file() {
        return Err(load_err(dir, format!("missing {GROUNDTRUTH_FILE}")));
    }
    let groundtruth = parse_groundtruth(&gt_path)?;
    let frames = list_frames(dir)?;
    if frames.is_empty() {
        return Err(load_err(dir, "no frame images (.png or .ppm)"));
    }
    if frames.len() != groundtruth.len() {
        return Err(load_err(
            dir,
            format!(
                "frame count mismatch: {} frames but {} ground-truth boxes",
                frames.len(),
                groundtruth.len()
            ),
        ));
    }
    let (width, height) = image_dimensions(&frames[0]).map_err(|e| Error::at_frame(0, e))?;
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    Ok(SequenceManifest {
        id,
        dir: dir.to_path_buf(),
        frames,
        groundtruth,
        width,
        height,
    })
}
