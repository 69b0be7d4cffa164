//! The benchmark commands behind the `nightbench` binary.
//!
//! Every command is a plain function returning a summary value, so the same
//! pipeline can be driven from tests, examples or the CLI.

mod commands;
mod report;
mod sweep;

pub use self::commands::{cmd_degrade, cmd_eval, cmd_track, DegradeSummary, EvalOutput, TrackSummary};
pub use self::report::{cmd_report, curve_csv, table_csv, ReportFiles, CURVE_COLUMNS, TABLE_COLUMNS};
pub use self::sweep::{cmd_sweep, value_dir_name, SweepResult, SweepValueResult, RUN_META_FILE, SWEEP_FILE};
