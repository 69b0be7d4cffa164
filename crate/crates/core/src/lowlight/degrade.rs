use crate::error::{Error, Result};
use crate::pixel::{hsv_pixel_to_rgb, rgb_pixel_to_hsv, Image, RngState};

use super::DegradationParams;

/// Per-channel `v -> clamp(alpha * v^gamma + beta)`.
pub fn apply_gamma_contrast(img: &Image, alpha: f64, beta: f64, gamma: f64) -> Result<Image> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Param(format!("gamma must be finite and > 0, got {gamma}")));
    }
    Ok(img.map_channels(|v| alpha * v.powf(gamma) + beta))
}

/// Scales HSV saturation by `alpha_s` (clamped to `[0, 1]`), leaving hue and value untouched.
pub fn apply_color_imbalance(img: &Image, alpha_s: f64) -> Image {
    img.map_pixels(|px| {
        let [h, s, v] = rgb_pixel_to_hsv(px);
        hsv_pixel_to_rgb([h, (s * alpha_s).clamp(0.0, 1.0), v])
    })
}

/// Adds `N(mu, sigma^2) / 255` independently to every channel, then clamps.
pub fn add_gaussian_noise(img: &Image, sigma_8bit: f64, mu_8bit: f64, rng: &mut RngState) -> Result<Image> {
    let noise = crate::pixel::sample_gaussian(rng, mu_8bit, sigma_8bit, img.data().len())?;
    let mut it = noise.into_iter();
    Ok(img.map_channels(|v| v + it.next().unwrap_or(0.0) / 255.0))
}

/// Full model for frame `frame_index`: gamma/contrast, then saturation scaling,
/// then noise drawn from the substream `(p.seed, frame_index)`.
pub fn degrade_frame(img: &Image, p: &DegradationParams, frame_index: u64) -> Result<Image> {
    p.validate()?;
    let toned = apply_gamma_contrast(img, p.alpha, p.beta, p.gamma)?;
    let imbalanced = apply_color_imbalance(&toned, p.alpha_s);
    if p.sigma == 0.0 && p.mu == 0.0 {
        return Ok(imbalanced);
    }
    let mut rng = RngState::substream(p.seed, frame_index);
    add_gaussian_noise(&imbalanced, p.sigma, p.mu, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn colorful() -> Image {
        Image::from_fn(6, 8, |x, y| {
            [x as f64 / 7.0, y as f64 / 5.0, ((x + y) % 3) as f64 / 2.0]
        })
    }

    #[test]
    fn gamma_contrast_points() {
        let img = colorful();
        assert_eq!(apply_gamma_contrast(&img, 1.0, 0.0, 1.0).unwrap(), img);

        let gray = Image::filled(3, 3, [0.25; 3]);
        let out = apply_gamma_contrast(&gray, 0.4, 0.0, 0.5).unwrap();
        assert!(out.data().iter().all(|v| (v - 0.2).abs() < 1e-15));

        let bright = Image::filled(1, 1, [0.8; 3]);
        let out = apply_gamma_contrast(&bright, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(out.data(), &[1.0; 3]);

        assert!(apply_gamma_contrast(&img, 1.0, 0.0, 0.0).is_err());
        assert!(apply_gamma_contrast(&img, 1.0, 0.0, -2.0).is_err());
    }

    #[test]
    fn color_imbalance_points() {
        let img = colorful();
        assert!(apply_color_imbalance(&img, 1.0).max_abs_diff(&img) < 1e-12);

        let flat = apply_color_imbalance(&img, 0.0);
        for (px, orig) in flat.pixels().zip(img.pixels()) {
            let v = orig.iter().cloned().fold(0.0, f64::max);
            assert!(px.iter().all(|c| (c - v).abs() < 1e-12));
        }

        let red = Image::filled(1, 1, [1.0, 0.0, 0.0]);
        let out = apply_color_imbalance(&red, 0.5);
        assert!(out.max_abs_diff(&Image::filled(1, 1, [1.0, 0.5, 0.5])) < 1e-12);
    }

    #[test]
    fn noise_points() {
        let img = Image::filled(4, 4, [0.5; 3]);
        let mut rng = RngState::new(3);
        assert_eq!(add_gaussian_noise(&img, 0.0, 0.0, &mut rng).unwrap(), img);
        let out = add_gaussian_noise(&img, 0.0, 25.5, &mut rng).unwrap();
        assert!(out.data().iter().all(|v| (v - 0.6).abs() < 1e-12));
    }

    #[test]
    fn noise_std_matches_sigma() {
        // Mid-gray keeps almost every sample off the clamp boundaries (0.5 is 3.2 sigma from each).
        let img = Image::filled(200, 200, [0.5; 3]);
        let out = add_gaussian_noise(&img, 40.0, 0.0, &mut RngState::new(11)).unwrap();
        for c in 0..3 {
            let diffs: Vec<f64> = out
                .data()
                .iter()
                .zip(img.data())
                .skip(c)
                .step_by(3)
                .filter(|(o, _)| **o > 0.0 && **o < 1.0)
                .map(|(o, i)| (o - i) * 255.0)
                .collect();
            let n = diffs.len() as f64;
            let mean = diffs.iter().sum::<f64>() / n;
            let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!((std - 40.0).abs() < 1.0, "channel {c} std {std}");
        }
    }

    #[test]
    fn identity_params_reproduce_input() {
        let img = colorful();
        let out = degrade_frame(&img, &DegradationParams::identity(), 0).unwrap();
        assert!(out.max_abs_diff(&img) < 1e-5);
    }

    #[test]
    fn gray_frame_point_check() {
        let img = Image::filled(5, 5, [0.25; 3]);
        let p = DegradationParams {
            alpha: 0.4,
            beta: 0.0,
            gamma: 0.5,
            alpha_s: 0.3,
            sigma: 0.0,
            mu: 0.0,
            seed: 1,
        };
        let out = degrade_frame(&img, &p, 0).unwrap();
        assert!(out.data().iter().all(|v| (v - 0.2).abs() < 1e-6));
    }

    #[test]
    fn matches_manual_three_stage_composition() {
        let img = colorful();
        let p = DegradationParams::default().with_seed(5);
        let manual = {
            let a = apply_gamma_contrast(&img, p.alpha, p.beta, p.gamma).unwrap();
            let b = apply_color_imbalance(&a, p.alpha_s);
            add_gaussian_noise(&b, p.sigma, p.mu, &mut RngState::substream(p.seed, 4)).unwrap()
        };
        assert_eq!(degrade_frame(&img, &p, 4).unwrap(), manual);
        assert_ne!(degrade_frame(&img, &p, 5).unwrap(), manual);
    }

    proptest! {
        #[test]
        fn grayscale_invariant_under_saturation(v in 0.0f64..=1.0, alpha_s in 0.0f64..3.0) {
            let img = Image::filled(2, 2, [v; 3]);
            prop_assert!(apply_color_imbalance(&img, alpha_s).max_abs_diff(&img) < 1e-12);
        }

        #[test]
        fn larger_gamma_never_brightens(
            v in 0.0f64..=1.0,
            alpha in 0.01f64..2.0,
            g1 in 0.1f64..5.0,
            dg in 0.0f64..3.0,
        ) {
            let img = Image::filled(1, 1, [v; 3]);
            let lo = apply_gamma_contrast(&img, alpha, 0.0, g1).unwrap();
            let hi = apply_gamma_contrast(&img, alpha, 0.0, g1 + dg).unwrap();
            prop_assert!(hi.data()[0] <= lo.data()[0] + 1e-15);
        }

        #[test]
        fn degrade_is_pure(seed in any::<u64>(), index in 0u64..1000) {
            let img = Image::from_fn(3, 3, |x, y| [x as f64 / 2.0, y as f64 / 2.0, 0.5]);
            let p = DegradationParams::default().with_seed(seed);
            prop_assert_eq!(degrade_frame(&img, &p, index).unwrap(), degrade_frame(&img, &p, index).unwrap());
        }
    }
}
