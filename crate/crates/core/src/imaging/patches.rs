use super::ImageBuffer;
use crate::{Error, Result};

/// Tiling of an image into square patches.
#[derive(Debug, Clone)]
pub struct PatchGrid {
    pub image_height: usize,
    pub image_width: usize,
    pub channels: usize,
    pub patch_size: usize,
    pub stride: usize,
    /// Top-left corner `(row, col)` of each patch, row-major.
    pub origins: Vec<(usize, usize)>,
    pub patches: Vec<ImageBuffer>,
}

impl PatchGrid {
    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }
}

/// Patch origins along one axis: multiples of `stride`, plus a final origin
/// clamped so the last patch ends on the border.
pub fn grid_origins(extent: usize, size: usize, stride: usize) -> Vec<usize> {
    let mut origins: Vec<usize> = (0..)
        .map(|k| k * stride)
        .take_while(|o| o + size <= extent)
        .collect();
    if let Some(&last) = origins.last() {
        if last + size < extent {
            origins.push(extent - size);
        }
    }
    origins
}

pub fn extract_patches(img: &ImageBuffer, size: usize, stride: usize) -> Result<PatchGrid> {
    if size == 0 || size > img.height().min(img.width()) {
        return Err(Error::invalid(format!(
            "patch size {size} does not fit a {}x{} image",
            img.height(),
            img.width()
        )));
    }
    if stride == 0 || stride > size {
        return Err(Error::invalid(format!(
            "stride must lie in 1..={size}, got {stride}"
        )));
    }
    let rows = grid_origins(img.height(), size, stride);
    let cols = grid_origins(img.width(), size, stride);
    let origins: Vec<(usize, usize)> = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .collect();
    let patches = origins
        .iter()
        .map(|&(r, c)| img.crop(r, c, size, size))
        .collect::<Result<_>>()?;
    Ok(PatchGrid {
        image_height: img.height(),
        image_width: img.width(),
        channels: img.channels(),
        patch_size: size,
        stride,
        origins,
        patches,
    })
}

/// Place patches back, averaging overlaps uniformly; clamps to `[0, 1]`.
pub fn assemble_patches(grid: &PatchGrid, patches: &[ImageBuffer]) -> Result<ImageBuffer> {
    if patches.len() != grid.origins.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.origins.len(),
            actual: patches.len(),
        });
    }
    let (h, w, ch) = (grid.image_height, grid.image_width, grid.channels);
    let mut sum = vec![0.0; h * w * ch];
    let mut count = vec![0u32; h * w];
    for (&(r0, c0), patch) in grid.origins.iter().zip(patches) {
        if patch.height() != grid.patch_size
            || patch.width() != grid.patch_size
            || patch.channels() != ch
        {
            return Err(Error::invalid("patch shape does not match grid"));
        }
        for r in 0..grid.patch_size {
            for c in 0..grid.patch_size {
                let px = (r0 + r) * w + (c0 + c);
                count[px] += 1;
                for k in 0..ch {
                    sum[px * ch + k] += patch.get(r, c, k);
                }
            }
        }
    }
    if count.contains(&0) {
        return Err(Error::invalid("patches do not cover the image"));
    }
    let samples = sum
        .iter()
        .enumerate()
        .map(|(i, s)| (s / f64::from(count[i / ch])).clamp(0.0, 1.0))
        .collect();
    ImageBuffer::new(h, w, ch, samples)
}
