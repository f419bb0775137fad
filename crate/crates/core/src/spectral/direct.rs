use super::{check_len, check_mu};
use crate::graph::Laplacian;
use crate::{Error, Result};

/// Exact filter through a banded Cholesky factorization of `I + mu L`.
///
/// Grid Laplacians in row-major order have bandwidth `width + 1`, so the
/// factorization costs `O(n * width^2)`.
pub fn filter_direct(laplacian: &Laplacian, y: &[f64], mu: f64) -> Result<Vec<f64>> {
    check_len(laplacian, y)?;
    check_mu(mu)?;
    let n = y.len();
    let bw = laplacian.bandwidth();
    let stride = bw + 1;
    // band[i * stride + (j + bw - i)] holds row i, column j, for i - bw <= j <= i
    let mut band = vec![0.0; n * stride];
    for (i, d) in laplacian.diagonal().iter().enumerate() {
        band[i * stride + bw] = 1.0 + mu * d;
    }
    for &(i, j, w) in laplacian.edges() {
        band[j * stride + (i + bw - j)] -= mu * w;
    }

    for i in 0..n {
        let lo = i.saturating_sub(bw);
        for j in lo..=i {
            let mut s = band[i * stride + (j + bw - i)];
            for k in lo.max(j.saturating_sub(bw))..j {
                s -= band[i * stride + (k + bw - i)] * band[j * stride + (k + bw - j)];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::invalid("system matrix is not positive definite"));
                }
                band[i * stride + bw] = s.sqrt();
            } else {
                band[i * stride + (j + bw - i)] = s / band[j * stride + bw];
            }
        }
    }

    let mut x = y.to_vec();
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        let mut s = x[i];
        for k in lo..i {
            s -= band[i * stride + (k + bw - i)] * x[k];
        }
        x[i] = s / band[i * stride + bw];
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..(i + bw + 1).min(n) {
            s -= band[k * stride + (i + bw - k)] * x[k];
        }
        x[i] = s / band[i * stride + bw];
    }
    Ok(x)
}
