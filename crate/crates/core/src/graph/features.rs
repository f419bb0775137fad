use std::fs;
use std::path::Path;

use crate::{Error, Patch, Result};

pub const DEFAULT_LOCATION_SCALE: f64 = 0.1;
pub const DEFAULT_INTENSITY_SCALE: f64 = 1.0;

pub const FEATURE_MAGIC: &[u8; 8] = b"DGTVFEAT";
pub const FEATURE_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 * 4;

/// Per-pixel feature vectors, row-major by pixel, feature-major within a pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    k: usize,
    values: Vec<f32>,
}

impl FeatureMap {
    pub fn new(height: usize, width: usize, k: usize, values: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || k == 0 {
            return Err(Error::invalid(format!(
                "feature map dimensions must be positive, got {height}x{width}x{k}"
            )));
        }
        let expected = height * width * k;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(idx));
        }
        Ok(Self {
            height,
            width,
            k,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.height * self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn feature(&self, node: usize) -> &[f32] {
        &self.values[node * self.k..(node + 1) * self.k]
    }

    /// Window of `height x width` pixels starting at (`row`, `col`).
    pub fn crop(&self, row: usize, col: usize, height: usize, width: usize) -> Result<Self> {
        if row + height > self.height || col + width > self.width {
            return Err(Error::invalid(format!(
                "crop {height}x{width} at ({row}, {col}) exceeds {}x{} feature map",
                self.height, self.width
            )));
        }
        let mut values = Vec::with_capacity(height * width * self.k);
        for r in row..row + height {
            let start = (r * self.width + col) * self.k;
            values.extend_from_slice(&self.values[start..start + width * self.k]);
        }
        Self::new(height, width, self.k, values)
    }
}

/// Bilateral-style default features: `(row / height * ls, col / width * ls,
/// intensity * is)` per pixel.
pub fn handcrafted_features(
    patch: &Patch,
    location_scale: f64,
    intensity_scale: f64,
) -> FeatureMap {
    let (h, w) = (patch.height(), patch.width());
    let mut values = Vec::with_capacity(3 * h * w);
    for r in 0..h {
        for c in 0..w {
            values.push((r as f64 / h as f64 * location_scale) as f32);
            values.push((c as f64 / w as f64 * location_scale) as f32);
            values.push((patch.get(r, c) * intensity_scale) as f32);
        }
    }
    FeatureMap {
        height: h,
        width: w,
        k: 3,
        values,
    }
}

pub fn encode_feature_map(map: &FeatureMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * map.values.len());
    out.extend_from_slice(FEATURE_MAGIC);
    for field in [
        FEATURE_VERSION,
        map.height as u32,
        map.width as u32,
        map.k as u32,
    ] {
        out.extend_from_slice(&field.to_le_bytes());
    }
    for v in &map.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_feature_map(bytes: &[u8]) -> Result<FeatureMap> {
    const KIND: &str = "feature map";
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(KIND, "truncated header"));
    }
    if &bytes[..8] != FEATURE_MAGIC {
        return Err(Error::format(KIND, "bad magic"));
    }
    let field = |idx: usize| {
        let at = 8 + 4 * idx;
        u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
    };
    let version = field(0) as u32;
    if version != FEATURE_VERSION {
        return Err(Error::format(
            KIND,
            format!("unsupported version {version}"),
        ));
    }
    let (height, width, k) = (field(1), field(2), field(3));
    let count = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(k))
        .ok_or_else(|| Error::format(KIND, "dimensions overflow"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 4 * count {
        return Err(Error::format(
            KIND,
            format!(
                "payload holds {} bytes, header implies {}",
                payload.len(),
                4 * count
            ),
        ));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureMap::new(height, width, k, values)
}

pub fn write_feature_file(map: &FeatureMap, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_feature_map(map))?;
    Ok(())
}

pub fn read_feature_file(path: impl AsRef<Path>) -> Result<FeatureMap> {
    decode_feature_map(&fs::read(path)?)
}
