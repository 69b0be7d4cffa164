//! End-to-end noise sweep on disk: degrade, track, evaluate, then build the report CSVs.
//!
//! ```bash
//! cargo run --release -p nightbench --example noise_sweep -- /tmp/nightbench-sweep
//! ```

use std::path::PathBuf;

use nightbench::bench::{cmd_report, cmd_sweep};
use nightbench::dataset::PreprocessSpec;
use nightbench::lowlight::{DegradationParams, SweepAxis, SweepSpec};
use nightbench::synthetic::TranslatingPatch;

fn main() -> nightbench::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "nightbench-sweep".into()));
    let seqs: Vec<PathBuf> = (0..2)
        .map(|i| {
            let dir = out.join("sequences").join(format!("patch-{i:03}"));
            TranslatingPatch { seed: 7 + i, ..Default::default() }.write(&dir).map(|m| m.dir)
        })
        .collect::<Result<_, _>>()?;

    let spec = SweepSpec {
        axis: SweepAxis::Noise,
        values: SweepAxis::Noise.reference_values(),
        defaults: DegradationParams::default(),
    };
    for (name, pre) in [("dark", PreprocessSpec::None), ("denoised", PreprocessSpec::Median { radius: 1 })] {
        let result = cmd_sweep(&seqs, &spec, &pre, out.join("results").join(name), 1)?;
        for (value, report) in result.reports() {
            println!("{name:<9} noise={value:<3} AUC {:6.2}  OP50 {:6.2}", report.auc, report.op50);
        }
    }
    let files = cmd_report(out.join("results"))?;
    println!("\n{}", std::fs::read_to_string(&files.table).unwrap());
    for c in files.curves {
        println!("curve file {}", c.display());
    }
    Ok(())
}
