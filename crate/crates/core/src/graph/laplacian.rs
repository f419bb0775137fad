use faer::{Mat, Side};

use super::PatchGraph;
use crate::{Error, Result};

/// Largest node count accepted by dense eigendecomposition (a 36x36 patch).
pub const DENSE_EIGEN_CAP: usize = 1296;

/// Sparse symmetric Laplacian `diag(W 1) - W`.
///
/// Off-diagonal entries are stored once per undirected edge as the
/// (nonnegative) weight `w_ij`; the matrix entry is `-w_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    diag: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

/// Full symmetric eigendecomposition, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl Laplacian {
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut diag = vec![0.0; n];
        let mut stored = Vec::new();
        for (i, j, w) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::invalid(format!(
                    "edge ({i}, {j}) invalid for {n} nodes"
                )));
            }
            if !w.is_finite() {
                return Err(Error::invalid(format!(
                    "non-finite weight on edge ({i}, {j})"
                )));
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { i, j, weight: w });
            }
            diag[i] += w;
            diag[j] += w;
            stored.push((i.min(j), i.max(j), w));
        }
        Ok(Self {
            diag,
            edges: stored,
        })
    }

    pub fn from_graph(graph: &PatchGraph) -> Result<Self> {
        Self::from_edges(
            graph.node_count(),
            graph.edges().iter().map(|e| (e.i, e.j, e.weight)),
        )
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Stored `(i, j, w_ij)` triples with `i < j`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// `out = L x`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n());
        debug_assert_eq!(out.len(), self.n());
        for ((o, d), xi) in out.iter_mut().zip(&self.diag).zip(x) {
            *o = d * xi;
        }
        for &(i, j, w) in &self.edges {
            out[i] -= w * x[j];
            out[j] -= w * x[i];
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Gershgorin upper bound on the spectrum: `2 * max_i L_ii`.
    pub fn gershgorin_bound(&self) -> f64 {
        2.0 * self.diag.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `|i - j|` over stored edges.
    pub fn bandwidth(&self) -> usize {
        self.edges.iter().map(|&(i, j, _)| j - i).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.n();
        let mut m = Mat::zeros(n, n);
        for (i, d) in self.diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        for &(i, j, w) in &self.edges {
            m[(i, j)] -= w;
            m[(j, i)] -= w;
        }
        m
    }

    pub fn eigen(&self) -> Result<Eigen> {
        let n = self.n();
        if n > DENSE_EIGEN_CAP {
            return Err(Error::DenseCapExceeded {
                n,
                cap: DENSE_EIGEN_CAP,
            });
        }
        symmetric_eigen(&self.to_dense())
    }
}

pub(crate) fn symmetric_eigen(m: &Mat<f64>) -> Result<Eigen> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    let s = evd.S().column_vector();
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let u = evd.U();
    let values = order.iter().map(|&k| s[k]).collect();
    let vectors = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

/// l1-Laplacian of a reweighted graph.
pub fn l1_laplacian(gamma_graph: &PatchGraph) -> Result<Laplacian> {
    Laplacian::from_graph(gamma_graph)
}

/// Graph Laplacian regularizer `x^T L x`.
pub fn glr_value(laplacian: &Laplacian, x: &[f64]) -> Result<f64> {
    if x.len() != laplacian.n() {
        return Err(Error::DimensionMismatch {
            expected: laplacian.n(),
            actual: x.len(),
        });
    }
    Ok(laplacian.quadratic_form(x))
}
