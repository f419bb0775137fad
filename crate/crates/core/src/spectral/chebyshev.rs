use std::f64::consts::PI;

use super::{check_len, check_mu, frequency_response};
use crate::graph::Laplacian;
use crate::{Error, Result};

/// Minimum number of Chebyshev-Gauss nodes used to evaluate coefficients.
const MIN_QUADRATURE_NODES: usize = 256;

/// Coefficients `c_0 .. c_order` of the Chebyshev expansion of
/// `1 / (1 + mu lambda)` on `[0, lambda_max]`, computed by Chebyshev-Gauss
/// quadrature. The expansion is `c_0 / 2 + sum_k c_k T_k(x)`.
pub fn chebyshev_coefficients(mu: f64, order: usize, lambda_max: f64) -> Vec<f64> {
    let nodes = MIN_QUADRATURE_NODES.max(2 * (order + 1));
    let half = lambda_max / 2.0;
    let samples: Vec<(f64, f64)> = (0..nodes)
        .map(|q| {
            let theta = PI * (q as f64 + 0.5) / nodes as f64;
            (theta, frequency_response(mu, half * (theta.cos() + 1.0)))
        })
        .collect();
    (0..=order)
        .map(|k| {
            let s: f64 = samples
                .iter()
                .map(|&(theta, f)| f * (k as f64 * theta).cos())
                .sum();
            2.0 * s / nodes as f64
        })
        .collect()
}

/// Degree-`order` truncated Chebyshev approximation of the graph filter,
/// applied through the three-term recurrence on the shifted operator
/// `2 L / lambda_max - I`.
pub fn filter_chebyshev(
    laplacian: &Laplacian,
    y: &[f64],
    mu: f64,
    order: usize,
    lambda_max: f64,
) -> Result<Vec<f64>> {
    check_len(laplacian, y)?;
    check_mu(mu)?;
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda_max must be positive, got {lambda_max}"
        )));
    }
    if order == 0 {
        return Err(Error::invalid("Chebyshev order must be at least 1"));
    }
    let coeffs = chebyshev_coefficients(mu, order, lambda_max);
    let n = y.len();
    let scale = 2.0 / lambda_max;
    let shifted = |x: &[f64], out: &mut [f64]| {
        laplacian.apply_into(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = scale * *o - xi;
        }
    };

    let mut prev = y.to_vec();
    let mut curr = vec![0.0; n];
    shifted(&prev, &mut curr);
    let mut out: Vec<f64> = prev
        .iter()
        .zip(&curr)
        .map(|(t0, t1)| 0.5 * coeffs[0] * t0 + coeffs[1] * t1)
        .collect();
    let mut next = vec![0.0; n];
    for c in &coeffs[2..] {
        shifted(&curr, &mut next);
        for i in 0..n {
            next[i] = 2.0 * next[i] - prev[i];
            out[i] += c * next[i];
        }
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }
    Ok(out)
}
