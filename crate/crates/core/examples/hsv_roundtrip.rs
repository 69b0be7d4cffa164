//! RGB <-> HSV conversion and the saturation operator on a few pixels.
//!
//! ```bash
//! cargo run -p nightbench --example hsv_roundtrip
//! ```

use nightbench::lowlight::apply_color_imbalance;
use nightbench::pixel::{hsv_pixel_to_rgb, rgb_pixel_to_hsv, Image};

fn main() {
    let samples = [[1.0, 0.0, 0.0], [0.2, 0.6, 0.4], [0.5, 0.5, 0.5], [0.9, 0.8, 0.1]];
    println!("{:>22} {:>22} {:>22}", "rgb", "hsv", "back");
    for rgb in samples {
        let hsv = rgb_pixel_to_hsv(rgb);
        let back = hsv_pixel_to_rgb(hsv);
        println!("{:>22} {:>22} {:>22}", fmt(rgb), fmt(hsv), fmt(back));
    }

    // scaling saturation pulls colors toward gray but leaves gray alone
    let img = Image::from_fn(1, samples.len(), |x, _| samples[x]);
    let washed = apply_color_imbalance(&img, 0.4);
    println!("\nsaturation x0.4:");
    for (before, after) in img.pixels().zip(washed.pixels()) {
        println!("  {} -> {}", fmt(before), fmt(after));
    }
}

fn fmt(p: [f64; 3]) -> String {
    format!("({:.3}, {:.3}, {:.3})", p[0], p[1], p[2])
}
