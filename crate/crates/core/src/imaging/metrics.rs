use super::ImageBuffer;
use crate::{Error, Result};

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn check_shapes(a: &ImageBuffer, b: &ImageBuffer) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch {
            expected: a.samples().len(),
            actual: b.samples().len(),
        });
    }
    Ok(())
}

/// Mean squared error over every sample.
pub fn mse(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    check_shapes(reference, test)?;
    let sum: f64 = reference
        .samples()
        .iter()
        .zip(test.samples())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / reference.samples().len() as f64)
}

/// PSNR in dB with peak 1.0; `+inf` for identical images.
pub fn psnr(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    let err = mse(reference, test)?;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / err).log10())
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let center = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - center;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Separable "valid" correlation with the 1-D window along both axes.
fn filter_valid(plane: &[f64], h: usize, w: usize, win: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let (oh, ow) = (h - SSIM_WINDOW + 1, w - SSIM_WINDOW + 1);
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            rows[r * ow + c] = (0..SSIM_WINDOW)
                .map(|k| win[k] * plane[r * w + c + k])
                .sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..SSIM_WINDOW)
                .map(|k| win[k] * rows[(r + k) * ow + c])
                .sum();
        }
    }
    out
}

/// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5, K1 0.01,
/// K2 0.03, dynamic range 1). Color images are compared on BT.601 luma.
pub fn ssim(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    check_shapes(reference, test)?;
    let (h, w) = (reference.height(), reference.width());
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {h}x{w}"
        )));
    }
    let x = reference.luminance().into_values();
    let y = test.luminance().into_values();
    let win = gaussian_window();
    let product = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).collect::<Vec<_>>();
    let mu_x = filter_valid(&x, h, w, &win);
    let mu_y = filter_valid(&y, h, w, &win);
    let xx = filter_valid(&product(&x, &x), h, w, &win);
    let yy = filter_valid(&product(&y, &y), h, w, &win);
    let xy = filter_valid(&product(&x, &y), h, w, &win);

    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let var_x = xx[i] - mx * mx;
            let var_y = yy[i] - my * my;
            let cov = xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (var_x + var_y + c2))
        })
        .sum();
    Ok(total / mu_x.len() as f64)
}
