//! The low-pass graph filter `x = (I + mu L)^-1 y` and its realizations.
//!
//! In the eigenbasis of `L` the filter has frequency response
//! `f(lambda) = 1 / (1 + mu lambda)`. Four interchangeable methods compute
//! it: a dense eigendecomposition reference, conjugate gradients on the SPD
//! system, a Lanczos (Krylov) approximation and a truncated Chebyshev
//! expansion. A banded Cholesky solve serves as a cheap exact reference for
//! benchmarks.

mod cg;
mod chebyshev;
mod direct;
mod exact;
mod lanczos;

use std::fmt;
use std::str::FromStr;

pub use cg::filter_linear_solve;
pub use chebyshev::{chebyshev_coefficients, filter_chebyshev};
pub use direct::filter_direct;
pub use exact::{filter_exact_eig, filter_with_eigen};
pub use lanczos::{filter_lanczos, lanczos_factorize, TridiagonalFactor};

use crate::graph::Laplacian;
use crate::{Error, Result};

pub const DEFAULT_ORDER: usize = 20;
pub const DEFAULT_SOLVE_TOLERANCE: f64 = 1e-10;

/// `1 / (1 + mu lambda)`.
pub fn frequency_response(mu: f64, lambda: f64) -> f64 {
    1.0 / (1.0 + mu * lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterMethod {
    ExactEig,
    LinearSolve,
    Lanczos,
    Chebyshev,
}

impl FilterMethod {
    pub const ALL: [FilterMethod; 4] = [
        FilterMethod::ExactEig,
        FilterMethod::LinearSolve,
        FilterMethod::Lanczos,
        FilterMethod::Chebyshev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterMethod::ExactEig => "exact",
            FilterMethod::LinearSolve => "cg",
            FilterMethod::Lanczos => "lanczos",
            FilterMethod::Chebyshev => "chebyshev",
        }
    }
}

impl fmt::Display for FilterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact_eig" => Ok(FilterMethod::ExactEig),
            "cg" | "linear_solve" => Ok(FilterMethod::LinearSolve),
            "lanczos" => Ok(FilterMethod::Lanczos),
            "chebyshev" => Ok(FilterMethod::Chebyshev),
            other => Err(Error::invalid(format!("unknown solver '{other}'"))),
        }
    }
}

/// How to apply the graph filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub mu: f64,
    pub method: FilterMethod,
    /// Krylov dimension (Lanczos) or polynomial degree (Chebyshev).
    pub order: usize,
    /// Relative residual target for conjugate gradients.
    pub solve_tolerance: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            mu: 0.5,
            method: FilterMethod::Lanczos,
            order: DEFAULT_ORDER,
            solve_tolerance: DEFAULT_SOLVE_TOLERANCE,
        }
    }
}

impl FilterSpec {
    pub fn new(mu: f64, method: FilterMethod) -> Result<Self> {
        let spec = Self {
            mu,
            method,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if self.order == 0 {
            return Err(Error::invalid("approximation order must be at least 1"));
        }
        if self.solve_tolerance.is_nan() || self.solve_tolerance <= 0.0 {
            return Err(Error::invalid("solve tolerance must be positive"));
        }
        Ok(())
    }

    /// Filter `y` on the graph of `laplacian`.
    ///
    /// A zero input maps to zero for every method, the Lanczos order is
    /// capped at the node count, and an edgeless Laplacian is the identity.
    pub fn apply(&self, laplacian: &Laplacian, y: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        if y.len() != laplacian.n() {
            return Err(Error::DimensionMismatch {
                expected: laplacian.n(),
                actual: y.len(),
            });
        }
        if y.iter().all(|&v| v == 0.0) {
            return Ok(vec![0.0; y.len()]);
        }
        match self.method {
            FilterMethod::ExactEig => filter_exact_eig(laplacian, y, self.mu),
            FilterMethod::LinearSolve => {
                filter_linear_solve(laplacian, y, self.mu, self.solve_tolerance)
            }
            FilterMethod::Lanczos => {
                filter_lanczos(laplacian, y, self.mu, self.order.min(laplacian.n()))
            }
            FilterMethod::Chebyshev => {
                let bound = laplacian.gershgorin_bound();
                if bound == 0.0 {
                    return Ok(y.to_vec());
                }
                filter_chebyshev(laplacian, y, self.mu, self.order, bound)
            }
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_len(laplacian: &Laplacian, y: &[f64]) -> Result<()> {
    if y.len() != laplacian.n() {
        return Err(Error::DimensionMismatch {
            expected: laplacian.n(),
            actual: y.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    Ok(())
}

/// `|a - b| / |b|`, or `|a|` when `b` is zero.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale = norm(b);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
