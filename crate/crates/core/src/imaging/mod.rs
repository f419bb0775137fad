//! Images in normalized `[0, 1]` intensities: Netpbm I/O, patch tiling,
//! synthetic noise, quality metrics and a small set of synthetic test images.

mod metrics;
mod netpbm;
mod noise;
mod patches;
pub mod synth;

pub use metrics::{mse, psnr, ssim};
pub use netpbm::{decode_netpbm, encode_netpbm, load_image, save_image};
pub use noise::{add_awgn, gaussian_noise};
pub use patches::{assemble_patches, extract_patches, grid_origins, PatchGrid};

use crate::{Error, Patch, Result};

/// BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Interleaved image with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    channels: usize,
    samples: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(height: usize, width: usize, channels: usize, samples: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "unsupported channel count {channels}"
            )));
        }
        let expected = height * width * channels;
        if samples.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: samples.len(),
            });
        }
        Ok(Self {
            height,
            width,
            channels,
            samples,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            vec![value; height * width * channels],
        )
    }

    pub fn gray(patch: &Patch) -> Self {
        Self {
            height: patch.height(),
            width: patch.width(),
            channels: 1,
            samples: patch.values().to_vec(),
        }
    }

    /// Interleave single-channel planes (1 or 3 of them, same shape).
    pub fn from_planes(planes: &[Patch]) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::invalid("no channel planes"))?;
        let (h, w) = (first.height(), first.width());
        if planes.iter().any(|p| p.height() != h || p.width() != w) {
            return Err(Error::invalid("channel planes differ in shape"));
        }
        let c = planes.len();
        let mut samples = vec![0.0; h * w * c];
        for (ch, plane) in planes.iter().enumerate() {
            for (i, v) in plane.values().iter().enumerate() {
                samples[i * c + ch] = *v;
            }
        }
        Self::new(h, w, c, samples)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.samples[(row * self.width + col) * self.channels + channel]
    }

    pub fn same_shape(&self, other: &ImageBuffer) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub fn plane(&self, channel: usize) -> Patch {
        let values = self
            .samples
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .copied()
            .collect();
        Patch::new(self.height, self.width, values).expect("shape checked at construction")
    }

    pub fn planes(&self) -> Vec<Patch> {
        (0..self.channels).map(|c| self.plane(c)).collect()
    }

    /// Gray plane, or BT.601 luma for color images.
    pub fn luminance(&self) -> Patch {
        if self.channels == 1 {
            return self.plane(0);
        }
        let values = self
            .samples
            .chunks_exact(3)
            .map(|px| px.iter().zip(LUMA_WEIGHTS).map(|(v, w)| v * w).sum())
            .collect();
        Patch::new(self.height, self.width, values).expect("shape checked at construction")
    }

    pub fn clamped(mut self) -> Self {
        for v in &mut self.samples {
            *v = v.clamp(0.0, 1.0);
        }
        self
    }

    /// Window of `size_h x size_w` pixels at (`row`, `col`).
    pub fn crop(&self, row: usize, col: usize, size_h: usize, size_w: usize) -> Result<Self> {
        if row + size_h > self.height || col + size_w > self.width {
            return Err(Error::invalid("crop window exceeds image"));
        }
        let mut samples = Vec::with_capacity(size_h * size_w * self.channels);
        for r in row..row + size_h {
            let start = (r * self.width + col) * self.channels;
            samples.extend_from_slice(&self.samples[start..start + size_w * self.channels]);
        }
        Self::new(size_h, size_w, self.channels, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planes_round_trip() {
        let samples: Vec<f64> = (0..24).map(|v| v as f64 / 24.0).collect();
        let img = ImageBuffer::new(2, 4, 3, samples).unwrap();
        let back = ImageBuffer::from_planes(&img.planes()).unwrap();
        assert_eq!(back, img);
        assert_eq!(img.plane(1).get(1, 2), img.get(1, 2, 1));
    }

    #[test]
    fn luminance_uses_bt601() {
        let img = ImageBuffer::new(1, 1, 3, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(img.luminance().values(), &[0.299]);
        let white = ImageBuffer::filled(2, 2, 3, 1.0).unwrap();
        assert!(white
            .luminance()
            .values()
            .iter()
            .all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ImageBuffer::new(0, 2, 1, vec![]).is_err());
        assert!(ImageBuffer::new(2, 2, 2, vec![0.0; 8]).is_err());
        assert!(ImageBuffer::new(2, 2, 1, vec![0.0; 5]).is_err());
    }
}
