//! Optional PNG input (8-bit grayscale and RGB), behind the `png` feature.

use super::GrayImage;
use crate::error::{Error, Result};

/// Decodes an 8-bit grayscale or RGB PNG; color is reduced with luma weights
/// (0.299, 0.587, 0.114).
pub fn load_png(bytes: &[u8]) -> Result<GrayImage> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| Error::ImageParse {
        offset: 0,
        message: e.to_string(),
    })?;
    let mut buf = vec![
        0u8;
        reader.output_buffer_size().ok_or_else(|| {
            Error::ImageParse {
                offset: 0,
                message: "output buffer size overflow".into(),
            }
        })?
    ];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::ImageParse {
        offset: 0,
        message: e.to_string(),
    })?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedImageFormat(format!(
            "png bit depth {:?} (only 8-bit is supported)",
            info.bit_depth
        )));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let data = &buf[..info.buffer_size()];
    let pixels: Vec<f64> = match info.color_type {
        png::ColorType::Grayscale => data.iter().map(|&v| v as f64 / 255.0).collect(),
        png::ColorType::Rgb => data
            .chunks_exact(3)
            .map(|px| (0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64) / 255.0)
            .collect(),
        other => {
            return Err(Error::UnsupportedImageFormat(format!(
                "png color type {other:?} (only grayscale and RGB are supported)"
            )))
        }
    };
    GrayImage::from_pixels(width, height, pixels)
}
