use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::template::{update_template, TemplateState};
use super::TokenSeq;
use crate::dataset::{preprocess_frame, PreprocessSpec, SequenceManifest};
use crate::error::{Error, Result};
use crate::metrics::{BoundingBox, TrackRun};
use crate::pixel::Image;

/// Settings of the normalized cross-correlation baseline tracker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NccConfig {
    /// Half-width of the square search window in pixels.
    pub search_radius: usize,
    /// Refresh the online template through the confidence gate.
    pub update_template: bool,
    /// Confidence is `logistic(gain * (peak - midpoint))`.
    pub confidence_gain: f64,
    pub confidence_midpoint: f64,
}

impl Default for NccConfig {
    fn default() -> Self {
        NccConfig {
            search_radius: 10,
            update_template: true,
            confidence_gain: 10.0,
            confidence_midpoint: 0.5,
        }
    }
}

impl NccConfig {
    pub fn confidence(&self, peak: f64) -> f64 {
        1.0 / (1.0 + (-self.confidence_gain * (peak - self.confidence_midpoint)).exp())
    }
}

/// Grayscale plane used for matching.
struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    fn from_image(img: &Image) -> Self {
        Plane {
            width: img.width(),
            height: img.height(),
            data: img.luma(),
        }
    }

    /// Extracts a `w x h` patch at integer `(x, y)` as a `(h*w) x 1` token grid.
    fn patch(&self, x: usize, y: usize, w: usize, h: usize) -> TokenSeq {
        let tokens = Array2::from_shape_fn((w * h, 1), |(i, _)| {
            self.data[(y + i / w) * self.width + x + i % w]
        });
        TokenSeq::new(tokens, h, w).expect("patch is non-empty and finite")
    }
}

/// Zero-mean template with its norm; `None` when the template has no variance.
struct Template {
    w: usize,
    h: usize,
    centered: Vec<f64>,
    norm: f64,
}

impl Template {
    fn new(seq: &TokenSeq) -> Option<Self> {
        let (h, w) = seq.layout();
        let vals: Vec<f64> = seq.tokens().column(0).to_vec();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let centered: Vec<f64> = vals.iter().map(|v| v - mean).collect();
        let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
        (norm > 1e-12).then_some(Template { w, h, centered, norm })
    }

    /// NCC in `[-1, 1]` against the window at `(x, y)`; `None` for a flat window.
    fn score(&self, plane: &Plane, x: usize, y: usize) -> Option<f64> {
        let n = (self.w * self.h) as f64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut cross = 0.0;
        for r in 0..self.h {
            let row = &plane.data[(y + r) * plane.width + x..][..self.w];
            let trow = &self.centered[r * self.w..][..self.w];
            for (v, t) in row.iter().zip(trow) {
                sum += v;
                sum_sq += v * v;
                cross += v * t;
            }
        }
        // sum(t_c) == 0, so sum(t_c * (v - mean_v)) == sum(t_c * v)
        let var = sum_sq - sum * sum / n;
        if var <= 1e-12 {
            return None;
        }
        Some(cross / (self.norm * var.sqrt()))
    }
}

/// Exhaustive NCC template tracker with a fixed box size.
///
/// Each frame the current online template is matched at every integer offset
/// within `search_radius` of the previous position; the best peak becomes the
/// new position and (if enabled) the patch there is offered to the template gate
/// with confidence `logistic(10 (peak - 0.5))`.
pub struct NccTracker {
    cfg: NccConfig,
    init: BoundingBox,
    w: usize,
    h: usize,
    x: usize,
    y: usize,
    origin: (usize, usize),
    state: Option<TemplateState>,
}

impl NccTracker {
    /// Starts tracking `init` in the first frame.
    pub fn new(first: &Image, init: BoundingBox, cfg: NccConfig) -> Result<Self> {
        let w = (init.w.round() as usize).max(1);
        let h = (init.h.round() as usize).max(1);
        if w > first.width() || h > first.height() {
            return Err(Error::Param(format!(
                "initial box {init:?} does not fit in a {}x{} frame",
                first.width(),
                first.height()
            )));
        }
        let x = init.x.round();
        let y = init.y.round();
        if x < 0.0 || y < 0.0 || x as usize + w > first.width() || y as usize + h > first.height() {
            return Err(Error::Param(format!(
                "initial box {init:?} lies outside the {}x{} frame",
                first.width(),
                first.height()
            )));
        }
        let (x, y) = (x as usize, y as usize);
        let patch = Plane::from_image(first).patch(x, y, w, h);
        Ok(NccTracker {
            cfg,
            init,
            w,
            h,
            x,
            y,
            origin: (x, y),
            state: Some(TemplateState::new(patch)),
        })
    }

    pub fn template_state(&self) -> Option<&TemplateState> {
        self.state.as_ref()
    }

    /// Locates the target in the next frame; `None` marks a tracking failure.
    pub fn step(&mut self, frame: &Image) -> Option<BoundingBox> {
        let plane = Plane::from_image(frame);
        if plane.width < self.w || plane.height < self.h {
            return None;
        }
        let state = self.state.as_ref()?;
        let template = Template::new(state.online())?;
        let r = self.cfg.search_radius as isize;
        let max_x = (plane.width - self.w) as isize;
        let max_y = (plane.height - self.h) as isize;
        let mut best: Option<(f64, isize, usize, usize)> = None;
        for dy in -r..=r {
            let y = self.y as isize + dy;
            if y < 0 || y > max_y {
                continue;
            }
            for dx in -r..=r {
                let x = self.x as isize + dx;
                if x < 0 || x > max_x {
                    continue;
                }
                let Some(score) = template.score(&plane, x as usize, y as usize) else {
                    continue;
                };
                let dist = dx * dx + dy * dy;
                let better = match best {
                    None => true,
                    Some((s, d, _, _)) => score > s || (score == s && dist < d),
                };
                if better {
                    best = Some((score, dist, x as usize, y as usize));
                }
            }
        }
        let (peak, _, x, y) = best?;
        self.x = x;
        self.y = y;
        if self.cfg.update_template {
            let candidate = plane.patch(x, y, self.w, self.h);
            let next = update_template(state, &candidate, self.cfg.confidence(peak));
            self.state = Some(next);
        }
        Some(self.init.translate(
            x as f64 - self.origin.0 as f64,
            y as f64 - self.origin.1 as f64,
        ))
    }

    /// Predictions for a whole sequence of frames; the first frame yields `init`.
    pub fn track<I>(frames: I, init: BoundingBox, cfg: NccConfig) -> Result<Vec<Option<BoundingBox>>>
    where
        I: IntoIterator<Item = Result<Image>>,
    {
        let mut frames = frames.into_iter().enumerate();
        let first = match frames.next() {
            Some((_, f)) => f.map_err(|e| Error::at_frame(0, e))?,
            None => return Err(Error::Param("cannot track an empty sequence".into())),
        };
        let mut tracker = NccTracker::new(&first, init, cfg)?;
        let mut preds = vec![Some(init)];
        for (i, frame) in frames {
            let frame = frame.map_err(|e| Error::at_frame(i, e))?;
            preds.push(tracker.step(&frame));
        }
        Ok(preds)
    }
}

/// Runs the baseline over a sequence on disk, initialized from the first ground-truth box.
pub fn ncc_track(
    manifest: &SequenceManifest,
    init: BoundingBox,
    cfg: NccConfig,
    preprocess: &PreprocessSpec,
) -> Result<TrackRun> {
    let frames = (0..manifest.len()).map(|i| {
        let img = manifest.read_frame(i)?;
        preprocess_frame(&img, preprocess).map_err(|e| Error::at_frame(i, e))
    });
    let preds = NccTracker::track(frames, init, cfg)?;
    TrackRun::from_boxes(manifest.id.clone(), &manifest.groundtruth, &preds)
}
