//! Plain (P2) and binary (P5) PGM decoding and encoding.
//!
//! 8-bit and 16-bit samples are mapped linearly onto `[0, 1]`; 16-bit binary
//! samples are big-endian per the format. Header comments (`#`) are honored.
//! Parse errors carry the byte offset at which decoding failed.

use super::GrayImage;
use crate::error::{Error, Result};

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::ImageParse {
            offset: self.pos,
            message: message.into(),
        }
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<u64> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("digits are ascii")
            .parse::<u64>()
            .map_err(|e| Error::ImageParse {
                offset: start,
                message: format!("{what}: {e}"),
            })
    }
}

/// Decodes a P2 or P5 PGM image.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < 2 {
        return Err(cur.err("truncated magic"));
    }
    let binary = match &bytes[..2] {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(Error::UnsupportedImageFormat(format!(
                "magic {:?} is not PGM (P2/P5)",
                String::from_utf8_lossy(other)
            )))
        }
    };
    cur.pos = 2;
    let width = cur.read_uint("width")? as usize;
    let height = cur.read_uint("height")? as usize;
    let maxval = cur.read_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.err(format!("degenerate dimensions {width} x {height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(cur.err(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| cur.err("dimensions overflow"))?;
    let scale = 1.0 / maxval as f64;
    let mut pixels = Vec::with_capacity(count);

    if binary {
        // exactly one whitespace byte separates the header from the raster
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(cur.err("expected single whitespace before raster"));
        }
        cur.pos += 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        if bytes.len() - cur.pos < need {
            return Err(Error::ImageParse {
                offset: bytes.len(),
                message: format!(
                    "raster truncated: need {need} bytes, have {}",
                    bytes.len() - cur.pos
                ),
            });
        }
        for i in 0..count {
            let v = if wide {
                let hi = bytes[cur.pos + 2 * i] as u64;
                let lo = bytes[cur.pos + 2 * i + 1] as u64;
                (hi << 8) | lo
            } else {
                bytes[cur.pos + i] as u64
            };
            if v > maxval {
                return Err(Error::ImageParse {
                    offset: cur.pos + i,
                    message: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            pixels.push(v as f64 * scale);
        }
    } else {
        for _ in 0..count {
            let v = cur.read_uint("sample")?;
            if v > maxval {
                return Err(cur.err(format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(v as f64 * scale);
        }
    }
    GrayImage::from_pixels(width, height, pixels)
}

/// Encodes as binary 8-bit PGM (`value = round(255 * v)`, clamped).
pub fn save_pgm8(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(
        img.pixels()
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

/// Encodes as binary 16-bit PGM (`value = round(65535 * v)`, big-endian).
pub fn save_pgm16(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", img.width(), img.height()).into_bytes();
    for &v in img.pixels() {
        let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}
