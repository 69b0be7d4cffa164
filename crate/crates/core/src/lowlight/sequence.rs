use std::path::Path;

use rayon::prelude::*;

use super::{degrade_frame, DegradationParams};
use crate::dataset::{write_groundtruth, SequenceManifest, GROUNDTRUTH_FILE};
use crate::error::{Error, Result};
use crate::pixel::write_image;

/// File written next to a degraded corpus recording the parameters used.
pub const PARAMS_FILE: &str = "degradation.cfg";

fn degrade_one(manifest: &SequenceManifest, p: &DegradationParams, out_dir: &Path, index: usize) -> Result<()> {
    let img = manifest.read_frame(index)?;
    let out = degrade_frame(&img, p, index as u64).map_err(|e| Error::at_frame(index, e))?;
    let name = manifest.frames[index]
        .file_name()
        .expect("frame paths have file names");
    write_image(&out, out_dir.join(name)).map_err(|e| Error::at_frame(index, e))
}

fn finish(manifest: &SequenceManifest, p: &DegradationParams, out_dir: &Path) -> Result<SequenceManifest> {
    write_groundtruth(&manifest.groundtruth, out_dir.join(GROUNDTRUTH_FILE))?;
    let params_path = out_dir.join(PARAMS_FILE);
    std::fs::write(&params_path, p.to_config_string()).map_err(|e| Error::io(&params_path, e))?;
    let frames = manifest
        .frames
        .iter()
        .map(|f| out_dir.join(f.file_name().expect("frame paths have file names")))
        .collect();
    Ok(SequenceManifest {
        id: manifest.id.clone(),
        dir: out_dir.to_path_buf(),
        frames,
        groundtruth: manifest.groundtruth.clone(),
        width: manifest.width,
        height: manifest.height,
    })
}

fn prepare(p: &DegradationParams, out_dir: &Path) -> Result<()> {
    p.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))
}

/// Degrades every frame (in parallel) into `out_dir`, copying the ground truth.
///
/// Each frame draws noise from the substream keyed by its index, so the output
/// does not depend on scheduling. On failure the lowest failing frame index is reported.
pub fn degrade_sequence(
    manifest: &SequenceManifest,
    p: &DegradationParams,
    out_dir: impl AsRef<Path>,
) -> Result<SequenceManifest> {
    let out_dir = out_dir.as_ref();
    prepare(p, out_dir)?;
    let results: Vec<Result<()>> = (0..manifest.len())
        .into_par_iter()
        .map(|i| degrade_one(manifest, p, out_dir, i))
        .collect();
    results.into_iter().collect::<Result<()>>()?;
    finish(manifest, p, out_dir)
}

/// Sequential variant processing frames in the given order; produces the same
/// files as [`degrade_sequence`] for any permutation of `0..len`.
pub fn degrade_sequence_in_order(
    manifest: &SequenceManifest,
    p: &DegradationParams,
    out_dir: impl AsRef<Path>,
    order: &[usize],
) -> Result<SequenceManifest> {
    let out_dir = out_dir.as_ref();
    let mut seen = vec![false; manifest.len()];
    for &i in order {
        if i >= manifest.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Param(format!("order is not a permutation of 0..{}", manifest.len())));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Param(format!("order is not a permutation of 0..{}", manifest.len())));
    }
    prepare(p, out_dir)?;
    for &i in order {
        degrade_one(manifest, p, out_dir, i)?;
    }
    finish(manifest, p, out_dir)
}
