//! Image representation, HSV conversion, seeded sampling and frame I/O.

mod hsv;
mod raster;
mod io;
mod rng;

pub use self::hsv::{hsv_pixel_to_rgb, hsv_to_rgb, rgb_pixel_to_hsv, rgb_to_hsv, HsvImage};
pub use self::raster::{clamp_unit, Image};
pub use self::io::{image_dimensions, quantize, read_image, write_image, FrameFormat};
pub use self::rng::{mix, sample_gaussian, RngState};
