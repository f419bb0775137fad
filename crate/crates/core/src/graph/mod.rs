//! Patch graphs: 8-neighborhood topology, feature-driven edge weights,
//! reweighting from a signal estimate, Laplacians and the two graph priors.

mod features;
mod laplacian;

pub use features::{
    decode_feature_map, encode_feature_map, handcrafted_features, read_feature_file,
    write_feature_file, FeatureMap, DEFAULT_INTENSITY_SCALE, DEFAULT_LOCATION_SCALE, FEATURE_MAGIC,
    FEATURE_VERSION,
};
pub(crate) use laplacian::symmetric_eigen;
pub use laplacian::{glr_value, l1_laplacian, Eigen, Laplacian, DENSE_EIGEN_CAP};

use crate::{Error, Result};

/// Kernel width used by the default configuration.
pub const DEFAULT_EPSILON: f64 = 0.3;
/// Floor on the estimate gap when reweighting.
pub const DEFAULT_RHO: f64 = 0.01;

/// One undirected edge, stored once with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Undirected weighted graph over a row-major pixel grid, 8-neighborhood
/// connectivity.
///
/// Weights built from features lie in `(0, 1]`. The same type also carries
/// reweighted graphs, whose weights are nonnegative but unbounded above.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGraph {
    height: usize,
    width: usize,
    edges: Vec<Edge>,
}

impl PatchGraph {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn node_count(&self) -> usize {
        self.height * self.width
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sum of incident edge weights per node.
    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.node_count()];
        for e in &self.edges {
            deg[e.i] += e.weight;
            deg[e.j] += e.weight;
        }
        deg
    }

    fn with_weights(&self, weights: impl Iterator<Item = f64>) -> PatchGraph {
        let edges = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, weight)| Edge { weight, ..*e })
            .collect();
        PatchGraph {
            height: self.height,
            width: self.width,
            edges,
        }
    }

    fn check_signal(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.node_count() {
            return Err(Error::DimensionMismatch {
                expected: self.node_count(),
                actual: x.len(),
            });
        }
        Ok(())
    }
}

/// Grid topology with unit weights.
///
/// Edges are enumerated per pixel in row-major order as right, down-left,
/// down, down-right, so every edge has `i < j`.
pub fn build_topology(height: usize, width: usize) -> Result<PatchGraph> {
    if height == 0 || width == 0 {
        return Err(Error::invalid(format!(
            "grid dimensions must be positive, got {height}x{width}"
        )));
    }
    let mut edges = Vec::with_capacity(4 * height * width);
    let node = |r: usize, c: usize| r * width + c;
    for r in 0..height {
        for c in 0..width {
            let i = node(r, c);
            let mut push = |j: usize| edges.push(Edge { i, j, weight: 1.0 });
            if c + 1 < width {
                push(node(r, c + 1));
            }
            if r + 1 < height {
                if c > 0 {
                    push(node(r + 1, c - 1));
                }
                push(node(r + 1, c));
                if c + 1 < width {
                    push(node(r + 1, c + 1));
                }
            }
        }
    }
    Ok(PatchGraph {
        height,
        width,
        edges,
    })
}

/// Gaussian-kernel weights `exp(-|f_i - f_j|^2 / epsilon^2)` on every
/// topological edge.
pub fn compute_edge_weights(
    topology: &PatchGraph,
    features: &FeatureMap,
    epsilon: f64,
) -> Result<PatchGraph> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if features.height() != topology.height || features.width() != topology.width {
        return Err(Error::DimensionMismatch {
            expected: topology.node_count(),
            actual: features.node_count(),
        });
    }
    let inv_eps2 = 1.0 / (epsilon * epsilon);
    let weights = topology.edges.iter().map(|e| {
        let d2 = squared_distance(features.feature(e.i), features.feature(e.j));
        // exp underflows for very distant features; keep weights strictly positive
        (-d2 * inv_eps2).exp().max(f64::MIN_POSITIVE)
    });
    Ok(topology.with_weights(weights))
}

fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&p, &q)| {
            let d = f64::from(p) - f64::from(q);
            d * d
        })
        .sum()
}

/// Reweighted graph with `gamma_ij = w_ij / max(|x_i - x_j|, rho)`.
pub fn reweight_gamma(graph: &PatchGraph, estimate: &[f64], rho: f64) -> Result<PatchGraph> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    graph.check_signal(estimate)?;
    let weights = graph
        .edges
        .iter()
        .map(|e| e.weight / (estimate[e.i] - estimate[e.j]).abs().max(rho));
    Ok(graph.with_weights(weights))
}

/// Graph total variation `sum w_ij |x_j - x_i|`.
pub fn gtv_value(graph: &PatchGraph, x: &[f64]) -> Result<f64> {
    graph.check_signal(x)?;
    Ok(graph
        .edges
        .iter()
        .map(|e| e.weight * (x[e.j] - x[e.i]).abs())
        .sum())
}

/// Edge-sum form of the graph Laplacian regularizer, `sum w_ij (x_j - x_i)^2`.
pub fn glr_edge_sum(graph: &PatchGraph, x: &[f64]) -> Result<f64> {
    graph.check_signal(x)?;
    Ok(graph
        .edges
        .iter()
        .map(|e| {
            let d = x[e.j] - x[e.i];
            e.weight * d * d
        })
        .sum())
}
