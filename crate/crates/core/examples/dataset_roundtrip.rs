//! Write a sequence directory, read it back, and round-trip a prediction file.

use nightbench::dataset::{load_sequence, parse_predictions, write_predictions};
use nightbench::metrics::TrackRun;
use nightbench::synthetic::TranslatingPatch;

fn main() -> nightbench::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let seq_dir = dir.path().join("patch-001");
    let written = TranslatingPatch { frames: 10, ..Default::default() }.write(&seq_dir)?;

    let manifest = load_sequence(&seq_dir)?;
    assert_eq!(manifest, written);
    println!("{}: {} frames {}x{}", manifest.id, manifest.len(), manifest.width, manifest.height);
    println!("first box {:?}", manifest.groundtruth[0]);

    let mut preds: Vec<_> = manifest.groundtruth.iter().copied().map(Some).collect();
    preds[4] = None;
    let run = TrackRun::from_boxes(manifest.id.clone(), &manifest.groundtruth, &preds)?;
    let pred_path = dir.path().join("patch-001.txt");
    write_predictions(&run, &pred_path)?;
    print!("{}", std::fs::read_to_string(&pred_path).unwrap().lines().take(6).map(|l| format!("  {l}\n")).collect::<String>());

    let back = parse_predictions(&pred_path, &manifest)?;
    assert_eq!(back, run);
    println!("prediction file round-trips ({} frames, 1 failure)", back.len());
    Ok(())
}
