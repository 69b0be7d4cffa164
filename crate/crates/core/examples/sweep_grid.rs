//! The one-parameter-at-a-time grids of the low-light study.

use nightbench::lowlight::{sweep_grid, DegradationParams, SweepAxis, SweepSpec};

fn main() -> nightbench::Result<()> {
    for axis in [SweepAxis::Noise, SweepAxis::Gamma, SweepAxis::Saturation] {
        let spec = SweepSpec {
            axis,
            values: axis.reference_values(),
            defaults: DegradationParams::default(),
        };
        println!("{axis} ({}):", axis.param_name());
        for p in sweep_grid(&spec)? {
            println!("  {p}");
        }
    }
    Ok(())
}
