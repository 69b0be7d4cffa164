//! Tracking evaluation: IoU/GIoU, center distances, success and precision
//! curves, and the scalar report (AUC, OP50, OP75, precision, normalized precision).

mod bbox;
mod curves;
mod report;
mod run;

pub use self::bbox::{center_distance, giou, iou, normalized_distance, BoundingBox};
pub use self::curves::{
    auc, auc_quadrature, linspace, norm_precision_at, norm_precision_curve, overlap_precision,
    precision_at, precision_curve, success_curve, Curve,
};
pub use self::report::{
    aggregate, evaluate_run, metrics_csv, write_json_file, write_scalar_csv, EvalConfig,
    MetricsReport, CSV_COLUMNS, NORM_PRECISION_CURVE_MAX, PRECISION_CURVE_MAX_PX,
};
pub use self::run::{FramePair, TrackRun};
