use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};

use super::raster::{clamp_unit, Image};
use crate::error::{Error, Result};

fn image_err(path: &Path, msg: impl ToString) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    }
}

/// File formats accepted for frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    Png,
    Ppm,
}

impl FrameFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(FrameFormat::Png),
            "ppm" => Some(FrameFormat::Ppm),
            _ => None,
        }
    }
}

/// Reads an 8-bit PNG or binary PPM; channel byte `c` becomes `c / 255`.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => return Err(image_err(path, format!("unsupported format {other:?}"))),
        None => return Err(image_err(path, "unrecognized image header")),
    }
    let decoded = reader.decode().map_err(|e| image_err(path, e))?;
    let rgb = match decoded {
        DynamicImage::ImageRgb8(img) => img,
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageRgba8(_) => {
            decoded.to_rgb8()
        }
        other => {
            return Err(image_err(
                path,
                format!("unsupported bit depth ({:?}); only 8-bit images are read", other.color()),
            ))
        }
    };
    let (w, h) = rgb.dimensions();
    let data = rgb.into_raw().into_iter().map(|c| c as f64 / 255.0).collect();
    Image::from_raw(h as usize, w as usize, data)
}

/// Writes as PNG or binary PPM (P6) depending on the extension; `v` becomes `round(clamp(v) * 255)`.
pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = FrameFormat::from_path(path)
        .ok_or_else(|| image_err(path, "extension must be .png or .ppm"))?;
    let bytes = quantize(img);
    let (w, h) = (img.width() as u32, img.height() as u32);
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let writer = BufWriter::new(file);
    let result = match format {
        FrameFormat::Png => image::codecs::png::PngEncoder::new(writer).write_image(
            &bytes,
            w,
            h,
            ExtendedColorType::Rgb8,
        ),
        FrameFormat::Ppm => PnmEncoder::new(writer)
            .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
            .write_image(&bytes, w, h, ExtendedColorType::Rgb8),
    };
    result.map_err(|e| image_err(path, e))
}

/// 8-bit quantization used at file boundaries.
pub fn quantize(img: &Image) -> Vec<u8> {
    img.data()
        .iter()
        .map(|v| (clamp_unit(*v) * 255.0).round() as u8)
        .collect()
}

/// Reads only the header to get `(width, height)`.
pub fn image_dimensions(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let (w, h) = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .into_dimensions()
        .map_err(|e| image_err(path, e))?;
    Ok((w as usize, h as usize))
}
