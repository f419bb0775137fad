//! Binary 8-bit PGM (P5) and PPM (P6).

use std::fs;
use std::path::Path;

use super::ImageBuffer;
use crate::{Error, Result};

const KIND: &str = "netpbm";

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    decode_netpbm(&fs::read(path)?)
}

pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_netpbm(img))?;
    Ok(())
}

/// Samples are rounded half-up to 8 bits after clamping to `[0, 1]`.
pub fn encode_netpbm(img: &ImageBuffer) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(
        img.samples()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8),
    );
    out
}

pub fn decode_netpbm(bytes: &[u8]) -> Result<ImageBuffer> {
    let mut cursor = Header { bytes, pos: 0 };
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(Error::format(KIND, "expected P5 or P6 magic")),
    };
    cursor.pos = 2;
    let width = cursor.number()?;
    let height = cursor.number()?;
    let maxval = cursor.number()?;
    if maxval != 255 {
        return Err(Error::format(KIND, format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(Error::format(KIND, "missing raster separator")),
    }
    if width == 0 || height == 0 {
        return Err(Error::format(KIND, "zero image dimension"));
    }
    let len = width * height * channels;
    let raster = bytes
        .get(cursor.pos..cursor.pos + len)
        .ok_or_else(|| Error::format(KIND, "truncated raster"))?;
    let samples = raster.iter().map(|&b| f64::from(b) / 255.0).collect();
    ImageBuffer::new(height, width, channels, samples)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        let start = self.pos;
        self.skip_space_and_comments();
        if self.pos == start {
            return Err(Error::format(KIND, "expected whitespace in header"));
        }
        let digits_start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[digits_start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(KIND, "malformed header number"))
    }
}
