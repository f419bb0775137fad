//! Graph total variation (GTV) image denoising.
//!
//! Each image patch becomes an 8-neighborhood graph whose edge weights come
//! from per-pixel feature vectors. Denoising repeatedly reweights the graph
//! from the current estimate and applies the low-pass graph filter
//! `(I + mu * L)^-1`, realized exactly or through Krylov (Lanczos) and
//! Chebyshev approximations.
//!
//! Module map:
//! - [`graph`]: topology, edge weights, reweighting, Laplacians and priors
//! - [`spectral`]: the graph filter and its approximations
//! - [`denoiser`]: the unrolled layer/block pipeline
//! - [`imaging`]: image I/O, patches, noise and quality metrics
//! - [`bench`]: approximation benchmark and mu sweep harnesses

pub mod bench;
pub mod denoiser;
mod error;
pub mod graph;
pub mod imaging;
pub mod parallel;
mod patch;
pub mod spectral;

pub use error::{Error, Result};
pub use patch::Patch;
