use faer::Mat;

use super::{check_len, check_mu, dot, frequency_response, norm};
use crate::graph::{symmetric_eigen, Eigen, Laplacian};
use crate::{Error, Result};

/// Relative size of the residual, against the Gershgorin norm bound of `L`,
/// below which the Krylov space counts as exhausted.
const BREAKDOWN_TOLERANCE: f64 = 1e-12;

/// Output of `m` Lanczos steps: an orthonormal Krylov basis `V` and the
/// tridiagonal projection `H = V^T L V`.
#[derive(Debug, Clone)]
pub struct TridiagonalFactor {
    /// Diagonal of `H`.
    pub alphas: Vec<f64>,
    /// Off-diagonal of `H`, one shorter than `alphas`.
    pub betas: Vec<f64>,
    /// Basis vectors `v_1 .. v_m`, each of length `n`.
    pub basis: Vec<Vec<f64>>,
    /// `|y|_2` of the starting vector.
    pub input_norm: f64,
}

impl TridiagonalFactor {
    pub fn order(&self) -> usize {
        self.alphas.len()
    }

    pub fn tridiagonal(&self) -> Mat<f64> {
        let m = self.order();
        Mat::from_fn(m, m, |i, j| {
            if i == j {
                self.alphas[i]
            } else if i + 1 == j {
                self.betas[i]
            } else if j + 1 == i {
                self.betas[j]
            } else {
                0.0
            }
        })
    }

    pub fn eigen(&self) -> Result<Eigen> {
        symmetric_eigen(&self.tridiagonal())
    }

    /// `|y| V f(H) e_1` for a scalar function `f`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let eig = self.eigen()?;
        let m = self.order();
        let q = &eig.vectors;
        // f(H) e_1 = Q f(Theta) Q^T e_1
        let mut coeffs = vec![0.0; m];
        for (k, &theta) in eig.values.iter().enumerate() {
            let weight = f(theta) * q[(0, k)];
            for (i, c) in coeffs.iter_mut().enumerate() {
                *c += q[(i, k)] * weight;
            }
        }
        let n = self.basis.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (v, c) in self.basis.iter().zip(&coeffs) {
            let scale = self.input_norm * c;
            for (o, vi) in out.iter_mut().zip(v) {
                *o += scale * vi;
            }
        }
        Ok(out)
    }
}

/// Lanczos tridiagonalization of `L` on the Krylov space of `y`, with full
/// reorthogonalization.
///
/// Stops early, returning the shorter factor, when the next residual
/// vanishes: the Krylov space is then invariant and the factor exact.
pub fn lanczos_factorize(
    laplacian: &Laplacian,
    y: &[f64],
    order: usize,
) -> Result<TridiagonalFactor> {
    check_len(laplacian, y)?;
    let n = y.len();
    if order == 0 || order > n {
        return Err(Error::invalid(format!(
            "Lanczos order must lie in 1..={n}, got {order}"
        )));
    }
    let input_norm = norm(y);
    if input_norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let breakdown = BREAKDOWN_TOLERANCE * laplacian.gershgorin_bound();

    let mut basis: Vec<Vec<f64>> = vec![y.iter().map(|v| v / input_norm).collect()];
    let mut alphas = Vec::with_capacity(order);
    let mut betas = Vec::with_capacity(order);
    let mut w = vec![0.0; n];
    loop {
        let m = basis.len() - 1;
        laplacian.apply_into(&basis[m], &mut w);
        let alpha = dot(&basis[m], &w);
        alphas.push(alpha);
        if alphas.len() == order {
            break;
        }
        for (wi, vi) in w.iter_mut().zip(&basis[m]) {
            *wi -= alpha * vi;
        }
        if m > 0 {
            let beta = betas[m - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[m - 1]) {
                *wi -= beta * vi;
            }
        }
        // two Gram-Schmidt passes against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let beta = norm(&w);
        if beta <= breakdown {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|v| v / beta).collect());
    }
    Ok(TridiagonalFactor {
        alphas,
        betas,
        basis,
        input_norm,
    })
}

/// Lanczos approximation `|y| V_M f(H_M) e_1` of the graph filter.
pub fn filter_lanczos(laplacian: &Laplacian, y: &[f64], mu: f64, order: usize) -> Result<Vec<f64>> {
    check_mu(mu)?;
    let factor = lanczos_factorize(laplacian, y, order)?;
    factor.apply_function(|lambda| frequency_response(mu, lambda))
}
