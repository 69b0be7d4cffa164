//! Box overlap metrics and the run-level report for a hand-built run.

use nightbench::metrics::{evaluate_run, giou, iou, BoundingBox, EvalConfig, TrackRun};

fn main() -> nightbench::Result<()> {
    let a = BoundingBox::new(0.0, 0.0, 2.0, 2.0)?;
    let b = BoundingBox::new(1.0, 1.0, 2.0, 2.0)?;
    println!("IoU  = {:.6} (1/7)", iou(&a, &b)?);
    println!("GIoU = {:.6} (-5/63)", giou(&a, &b)?);

    let gt: Vec<BoundingBox> = (0..5)
        .map(|i| BoundingBox::new(10.0 * i as f64, 0.0, 20.0, 20.0))
        .collect::<Result<_, _>>()?;
    let preds = vec![
        Some(gt[0]),
        Some(gt[1].translate(2.0, 0.0)),
        Some(gt[2].translate(8.0, 4.0)),
        None,
        Some(gt[4].scale(1.5)),
    ];
    let run = TrackRun::from_boxes("demo", &gt, &preds)?;
    let report = evaluate_run(&run, &EvalConfig::default())?;
    println!("\nper-frame IoU: {:?}", run.ious()?.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>());
    println!(
        "AUC {:.2}  OP50 {:.2}  OP75 {:.2}  P@20 {:.2}  NP@0.5 {:.2}",
        report.auc, report.op50, report.op75, report.precision, report.norm_precision
    );
    Ok(())
}
