//! Apply the low-light model to a single frame and write before/after PNGs.
//!
//! ```bash
//! cargo run -p nightbench --example degrade_frame -- /tmp/nightbench-frames
//! ```

use nightbench::lowlight::{degrade_frame, DegradationParams};
use nightbench::pixel::write_image;
use nightbench::synthetic::TranslatingPatch;

fn main() -> nightbench::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "nightbench-frames".into());
    std::fs::create_dir_all(&out).expect("create output dir");

    let frame = TranslatingPatch::default().frame(0)?;
    write_image(&frame, format!("{out}/clean.png"))?;

    for sigma in [0.0, 10.0, 40.0, 70.0] {
        let p = DegradationParams { sigma, seed: 42, ..Default::default() };
        let dark = degrade_frame(&frame, &p, 0)?;
        let mean = dark.data().iter().sum::<f64>() / dark.data().len() as f64;
        let path = format!("{out}/dark_sigma{sigma}.png");
        write_image(&dark, &path)?;
        println!("{p}  mean intensity {mean:.3}  -> {path}");
    }
    Ok(())
}
