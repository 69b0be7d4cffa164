//! Sequence directories, annotation and prediction files, and the frame
//! preprocessing slot that sits between degradation and tracking.

mod annotations;
mod predictions;
mod preprocess;
mod sequence;

pub use self::annotations::{
    format_boxes, parse_groundtruth, parse_groundtruth_str, parse_prediction_boxes, write_groundtruth,
};
pub use self::predictions::{parse_predictions, write_predictions};
pub use self::preprocess::{gaussian_blur, median_filter, preprocess_frame, PreprocessSpec, TMPDIR_ENV};
pub use self::sequence::{list_frames, load_sequence, SequenceManifest, GROUNDTRUTH_FILE};
