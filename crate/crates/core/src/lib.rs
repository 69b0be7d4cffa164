//! Benchmark toolkit for single-object tracking under low light.
//!
//! - [`pixel`]: normalized RGB images, HSV conversion, seeded sampling, PNG/PPM I/O.
//! - [`lowlight`]: the parametric low-light model and sweep grids.
//! - [`metrics`]: IoU, GIoU, AUC, OP50/OP75, precision and normalized precision.
//! - [`tracker`]: a toy mixed-attention module with analytic gradients, the
//!   localization and score losses, score-gated template updates, and an NCC baseline tracker.
//! - [`dataset`]: GOT-10k style sequence directories and frame preprocessing.
//! - [`bench`]: the degrade / track / eval / sweep / report commands.

pub mod bench;
pub mod dataset;
pub mod error;
pub mod lowlight;
pub mod metrics;
pub mod pixel;
pub mod synthetic;
pub mod tracker;

pub use error::{Error, Result};
