//! Track the constructed translating patch with the NCC baseline, clean and darkened.

use nightbench::dataset::{preprocess_frame, PreprocessSpec};
use nightbench::lowlight::{degrade_frame, DegradationParams};
use nightbench::metrics::{auc, TrackRun};
use nightbench::synthetic::TranslatingPatch;
use nightbench::tracker::{NccConfig, NccTracker};

fn main() -> nightbench::Result<()> {
    let seq = TranslatingPatch::default();
    let (frames, gt) = seq.generate()?;
    println!("{} frames of {}x{}, patch {}x{}", frames.len(), seq.width, seq.height, seq.patch_w, seq.patch_h);

    for (label, pre) in [("none", PreprocessSpec::None), ("median:1", PreprocessSpec::Median { radius: 1 })] {
        for sigma in [0.0, 40.0, 70.0] {
            let p = DegradationParams { sigma, seed: 1, ..Default::default() };
            let input = frames.iter().enumerate().map(|(i, f)| {
                let dark = degrade_frame(f, &p, i as u64)?;
                preprocess_frame(&dark, &pre)
            });
            let preds = NccTracker::track(input, gt[0], NccConfig::default())?;
            let run = TrackRun::from_boxes("patch", &gt, &preds)?;
            println!("preprocess {label:<9} sigma {sigma:>4}: AUC {:.2}", auc(&run)?);
        }
    }
    Ok(())
}
