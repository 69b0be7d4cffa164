//! Constructed sequences with exactly known ground truth: a textured patch
//! translating over a smooth textured background.

use std::path::Path;

use crate::dataset::{load_sequence, write_groundtruth, SequenceManifest, GROUNDTRUTH_FILE};
use crate::error::{Error, Result};
use crate::metrics::BoundingBox;
use crate::pixel::{mix, write_image, Image};

/// Parameters of a translating-patch sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatingPatch {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Patch size in pixels.
    pub patch_w: usize,
    pub patch_h: usize,
    /// Top-left corner of the patch in the first frame.
    pub start: (usize, usize),
    /// Per-frame displacement; the patch bounces off the frame borders.
    pub velocity: (isize, isize),
    /// Side length of the constant-intensity cells of the patch texture.
    pub cell: usize,
    /// Peak-to-peak intensity range of the patch texture around the background level.
    pub contrast: f64,
    pub seed: u64,
}

impl Default for TranslatingPatch {
    fn default() -> Self {
        TranslatingPatch {
            width: 320,
            height: 240,
            frames: 60,
            patch_w: 32,
            patch_h: 24,
            start: (20, 20),
            velocity: (3, 2),
            cell: 4,
            contrast: 0.5,
            seed: 7,
        }
    }
}

fn unit_hash(seed: u64, a: u64, b: u64) -> f64 {
    (mix(mix(seed, a), b) >> 11) as f64 / (1u64 << 53) as f64
}

/// Smooth value noise: bilinear interpolation of random values on a 16 px lattice.
fn background(seed: u64, x: usize, y: usize) -> f64 {
    const STEP: usize = 16;
    let (gx, gy) = (x / STEP, y / STEP);
    let fx = (x % STEP) as f64 / STEP as f64;
    let fy = (y % STEP) as f64 / STEP as f64;
    let v = |i: usize, j: usize| unit_hash(seed, i as u64, j as u64);
    let top = v(gx, gy) * (1.0 - fx) + v(gx + 1, gy) * fx;
    let bottom = v(gx, gy + 1) * (1.0 - fx) + v(gx + 1, gy + 1) * fx;
    0.3 + 0.4 * (top * (1.0 - fy) + bottom * fy)
}

impl TranslatingPatch {
    fn validate(&self) -> Result<()> {
        let ok = self.frames > 0
            && self.patch_w > 0
            && self.patch_h > 0
            && self.cell > 0
            && self.patch_w <= self.width
            && self.patch_h <= self.height
            && self.start.0 + self.patch_w <= self.width
            && self.start.1 + self.patch_h <= self.height
            && (0.0..=1.0).contains(&self.contrast);
        if ok {
            Ok(())
        } else {
            Err(Error::Param(format!("invalid translating-patch configuration {self:?}")))
        }
    }

    /// Top-left patch position in every frame.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let bounce = |p: isize, v: isize, max: isize| -> (isize, isize) {
            let n = p + v;
            if n < 0 {
                (-n, -v)
            } else if n > max {
                (2 * max - n, -v)
            } else {
                (n, v)
            }
        };
        let max_x = (self.width - self.patch_w) as isize;
        let max_y = (self.height - self.patch_h) as isize;
        let (mut x, mut y) = (self.start.0 as isize, self.start.1 as isize);
        let (mut vx, mut vy) = self.velocity;
        let mut out = Vec::with_capacity(self.frames);
        for _ in 0..self.frames {
            out.push((x.clamp(0, max_x) as usize, y.clamp(0, max_y) as usize));
            (x, vx) = bounce(x, vx, max_x);
            (y, vy) = bounce(y, vy, max_y);
        }
        out
    }

    pub fn groundtruth(&self) -> Vec<BoundingBox> {
        self.positions()
            .into_iter()
            .map(|(x, y)| {
                BoundingBox::new(x as f64, y as f64, self.patch_w as f64, self.patch_h as f64)
                    .expect("patch boxes are finite")
            })
            .collect()
    }

    fn patch_value(&self, px: usize, py: usize) -> f64 {
        let cell = unit_hash(self.seed ^ 0x5eed, (px / self.cell) as u64, (py / self.cell) as u64);
        0.5 + self.contrast * (cell - 0.5)
    }

    pub fn frame(&self, index: usize) -> Result<Image> {
        self.validate()?;
        let (ox, oy) = *self
            .positions()
            .get(index)
            .ok_or_else(|| Error::Param(format!("frame {index} beyond {} frames", self.frames)))?;
        Ok(self.render(ox, oy))
    }

    fn render(&self, ox: usize, oy: usize) -> Image {
        Image::from_fn(self.height, self.width, |x, y| {
            let inside = x >= ox && x < ox + self.patch_w && y >= oy && y < oy + self.patch_h;
            let v = if inside {
                self.patch_value(x - ox, y - oy)
            } else {
                background(self.seed, x, y)
            };
            // slight warm tint so the color operator has something to act on
            [v, v * 0.9, v * 0.8]
        })
    }

    /// All frames and their ground-truth boxes.
    pub fn generate(&self) -> Result<(Vec<Image>, Vec<BoundingBox>)> {
        self.validate()?;
        let frames = self.positions().into_iter().map(|(x, y)| self.render(x, y)).collect();
        Ok((frames, self.groundtruth()))
    }

    /// Writes the sequence as `00000001.png`, ... plus `groundtruth.txt` and loads it back.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<SequenceManifest> {
        let dir = dir.as_ref();
        let (frames, gt) = self.generate()?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, frame) in frames.iter().enumerate() {
            write_image(frame, dir.join(format!("{:08}.png", i + 1)))?;
        }
        write_groundtruth(&gt, dir.join(GROUNDTRUTH_FILE))?;
        load_sequence(dir)
    }
}

/// A sequence of identical frames with a fixed box.
pub fn static_sequence(width: usize, height: usize, frames: usize, seed: u64) -> TranslatingPatch {
    TranslatingPatch {
        width,
        height,
        frames,
        patch_w: width / 4,
        patch_h: height / 4,
        start: (width / 3, height / 3),
        velocity: (0, 0),
        cell: 2,
        contrast: 0.6,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_follow_velocity() {
        let s = TranslatingPatch::default();
        let p = s.positions();
        assert_eq!(p.len(), 60);
        assert_eq!(p[0], (20, 20));
        assert_eq!(p[1], (23, 22));
        assert_eq!(p[59], (20 + 3 * 59, 20 + 2 * 59));
    }

    #[test]
    fn bounces_inside_frame() {
        let s = TranslatingPatch {
            width: 40,
            height: 30,
            patch_w: 10,
            patch_h: 10,
            start: (25, 15),
            velocity: (4, 3),
            frames: 30,
            ..Default::default()
        };
        for (x, y) in s.positions() {
            assert!(x + 10 <= 40 && y + 10 <= 30);
        }
    }

    #[test]
    fn frame_matches_generate() {
        let s = TranslatingPatch { frames: 3, ..Default::default() };
        let (frames, gt) = s.generate().unwrap();
        assert_eq!(frames[2], s.frame(2).unwrap());
        assert_eq!(gt[2].x, 26.0);
    }

    #[test]
    fn rejects_oversized_patch() {
        let s = TranslatingPatch { patch_w: 400, ..Default::default() };
        assert!(s.generate().is_err());
    }
}
