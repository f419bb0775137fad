use super::{check_len, check_mu, frequency_response};
use crate::graph::{Eigen, Laplacian};
use crate::Result;

/// `U diag(f(lambda)) U^T y` from a full eigendecomposition of `L`.
pub fn filter_exact_eig(laplacian: &Laplacian, y: &[f64], mu: f64) -> Result<Vec<f64>> {
    check_len(laplacian, y)?;
    check_mu(mu)?;
    let eigen = laplacian.eigen()?;
    Ok(filter_with_eigen(&eigen, y, mu))
}

/// Spectral filter with a precomputed decomposition, so one factorization
/// serves many inputs.
pub fn filter_with_eigen(eigen: &Eigen, y: &[f64], mu: f64) -> Vec<f64> {
    let u = &eigen.vectors;
    let n = u.nrows();
    let mut out = vec![0.0; n];
    for (k, &lambda) in eigen.values.iter().enumerate() {
        let col = u.col(k);
        let coeff: f64 =
            (0..n).map(|i| col[i] * y[i]).sum::<f64>() * frequency_response(mu, lambda);
        for (i, o) in out.iter_mut().enumerate() {
            *o += coeff * col[i];
        }
    }
    out
}
