use super::{check_len, check_mu, dot, norm};
use crate::graph::Laplacian;
use crate::{Error, Result};

/// Floor on the iteration cap, for small systems where rounding keeps CG
/// from terminating in exactly `n` steps.
pub const MIN_ITERATIONS: usize = 100;

/// Jacobi-preconditioned conjugate gradients on `(I + mu L) x = y`.
///
/// Stops once `|(I + mu L) x - y| <= tol |y|`; gives up after
/// `max(n, MIN_ITERATIONS)` iterations.
pub fn filter_linear_solve(
    laplacian: &Laplacian,
    y: &[f64],
    mu: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    check_len(laplacian, y)?;
    check_mu(mu)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = y.len();
    let y_norm = norm(y);
    let mut x = vec![0.0; n];
    if y_norm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = laplacian
        .diagonal()
        .iter()
        .map(|d| 1.0 / (1.0 + mu * d))
        .collect();
    let target = tol * y_norm;
    let mut r = y.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let cap = n.max(MIN_ITERATIONS);
    for _ in 0..cap {
        laplacian.apply_into(&p, &mut ap);
        for (a, pi) in ap.iter_mut().zip(&p) {
            *a = pi + mu * *a;
        }
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= target {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rz = rz_next;
    }
    Err(Error::NotConverged {
        iterations: cap,
        residual: norm(&r) / y_norm,
    })
}
