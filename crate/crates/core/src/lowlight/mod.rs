//! Synthetic low-light degradation: gamma/contrast, saturation imbalance and
//! additive Gaussian noise, plus one-parameter-at-a-time sweep grids.

mod degrade;
mod params;
mod sequence;
mod sweep;

pub use self::degrade::{add_gaussian_noise, apply_color_imbalance, apply_gamma_contrast, degrade_frame};
pub use self::params::{Config, DegradationParams};
pub use self::sequence::{degrade_sequence, degrade_sequence_in_order, PARAMS_FILE};
pub use self::sweep::{parse_values, sweep_grid, SweepAxis, SweepSpec};
