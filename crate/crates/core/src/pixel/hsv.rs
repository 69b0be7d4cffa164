use super::raster::Image;

/// HSV raster: hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HsvImage {
    height: usize,
    width: usize,
    data: Vec<[f64; 3]>,
}

impl HsvImage {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.data
    }

    /// Builds from `(h, s, v)` triples; hue is wrapped modulo 360 and S, V are clamped.
    pub fn from_pixels(height: usize, width: usize, data: Vec<[f64; 3]>) -> Self {
        assert_eq!(data.len(), height * width, "HSV pixel count mismatch");
        let data = data
            .into_iter()
            .map(|[h, s, v]| [h.rem_euclid(360.0), s.clamp(0.0, 1.0), v.clamp(0.0, 1.0)])
            .collect();
        HsvImage {
            height,
            width,
            data,
        }
    }
}

/// Standard hexcone conversion. Achromatic pixels get `H = 0`.
pub fn rgb_pixel_to_hsv([r, g, b]: [f64; 3]) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta <= 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    [h.rem_euclid(360.0), s, max]
}

pub fn hsv_pixel_to_rgb([h, s, v]: [f64; 3]) -> [f64; 3] {
    let c = v * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r + m, g + m, b + m]
}

pub fn rgb_to_hsv(img: &Image) -> HsvImage {
    HsvImage {
        height: img.height(),
        width: img.width(),
        data: img.pixels().map(rgb_pixel_to_hsv).collect(),
    }
}

pub fn hsv_to_rgb(img: &HsvImage) -> Image {
    let mut it = img.data.iter();
    Image::from_fn(img.height, img.width, |_, _| {
        hsv_pixel_to_rgb(*it.next().expect("pixel count matches dimensions"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn canonical_conversions() {
        assert_eq!(rgb_pixel_to_hsv([1.0, 0.0, 0.0]), [0.0, 1.0, 1.0]);
        assert_eq!(rgb_pixel_to_hsv([0.5, 0.5, 0.5]), [0.0, 0.0, 0.5]);
        assert!(close(rgb_pixel_to_hsv([1.0, 0.5, 0.5]), [0.0, 0.5, 1.0], 1e-12));
        assert_eq!(rgb_pixel_to_hsv([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn inverse_conversions() {
        assert!(close(hsv_pixel_to_rgb([0.0, 0.0, 0.3]), [0.3, 0.3, 0.3], 1e-15));
        assert!(close(hsv_pixel_to_rgb([0.0, 1.0, 1.0]), [1.0, 0.0, 0.0], 1e-15));
        assert!(close(hsv_pixel_to_rgb([120.0, 1.0, 1.0]), [0.0, 1.0, 0.0], 1e-15));
        assert!(close(hsv_pixel_to_rgb([240.0, 1.0, 1.0]), [0.0, 0.0, 1.0], 1e-15));
    }

    #[test]
    fn thousand_random_pixels_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let px = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let back = hsv_pixel_to_rgb(rgb_pixel_to_hsv(px));
            for c in 0..3 {
                worst = worst.max((back[c] - px[c]).abs());
            }
        }
        assert!(worst < 1e-5, "max round-trip error {worst}");
    }

    #[test]
    fn image_level_round_trip() {
        let img = Image::from_fn(4, 5, |x, y| [x as f64 / 4.0, y as f64 / 3.0, 0.25]);
        let back = hsv_to_rgb(&rgb_to_hsv(&img));
        assert!(back.max_abs_diff(&img) < 1e-12);
    }

    proptest! {
        #[test]
        fn round_trip_where_saturated(r in 0.0f64..=1.0, g in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let hsv = rgb_pixel_to_hsv([r, g, b]);
            prop_assert!((0.0..360.0).contains(&hsv[0]));
            prop_assert!((0.0..=1.0).contains(&hsv[1]) && (0.0..=1.0).contains(&hsv[2]));
            if hsv[1] > 1e-6 {
                prop_assert!(close(hsv_pixel_to_rgb(hsv), [r, g, b], 1e-5));
            }
        }
    }
}
