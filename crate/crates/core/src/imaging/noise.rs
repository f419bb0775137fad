use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::ImageBuffer;
use crate::{Error, Result};

/// `len` i.i.d. zero-mean Gaussian samples with standard deviation `sigma`.
pub fn gaussian_noise(len: usize, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, sigma)
        .map_err(|_| Error::invalid(format!("invalid noise level {sigma}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..len).map(|_| normal.sample(&mut rng)).collect())
}

/// Additive white Gaussian noise with `sigma_255` on the 0-255 scale,
/// clamped to `[0, 1]` after adding.
pub fn add_awgn(img: &ImageBuffer, sigma_255: f64, seed: u64) -> Result<ImageBuffer> {
    if !(sigma_255 >= 0.0 && sigma_255.is_finite()) {
        return Err(Error::invalid(format!(
            "sigma must be nonnegative, got {sigma_255}"
        )));
    }
    if sigma_255 == 0.0 {
        return Ok(img.clone());
    }
    let noise = gaussian_noise(img.samples().len(), sigma_255 / 255.0, seed)?;
    let samples = img
        .samples()
        .iter()
        .zip(noise)
        .map(|(v, n)| (v + n).clamp(0.0, 1.0))
        .collect();
    ImageBuffer::new(img.height(), img.width(), img.channels(), samples)
}
