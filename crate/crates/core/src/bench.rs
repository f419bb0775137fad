//! Experiment harnesses behind the `bench-approx` and `sweep-mu` commands.
//!
//! Both write comma-separated tables with a header row. Column names and
//! order are stable:
//!
//! - approximation: `method,order,mean_mse,rel_mse,median_apply_us`
//! - sweep: `mu,psnr_in,psnr_out,ssim_in,ssim_out`
//!
//! `median_apply_us` is empty unless timing was requested, so untimed
//! reports are bit-identical for a fixed seed.

use std::fmt::Write as _;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::denoiser::{denoise_image, DenoiserConfig, MuSource};
use crate::graph::{
    build_topology, compute_edge_weights, handcrafted_features, Laplacian, DEFAULT_EPSILON,
    DEFAULT_INTENSITY_SCALE, DEFAULT_LOCATION_SCALE, DENSE_EIGEN_CAP,
};
use crate::imaging::{add_awgn, psnr, ssim, ImageBuffer};
use crate::parallel::{map_indexed, Execution};
use crate::spectral::{filter_chebyshev, filter_direct, filter_exact_eig, filter_lanczos};
use crate::{Error, Patch, Result};

pub const APPROX_HEADER: &str = "method,order,mean_mse,rel_mse,median_apply_us";
pub const SWEEP_HEADER: &str = "mu,psnr_in,psnr_out,ssim_in,ssim_out";
const TIMING_REPEATS: usize = 5;

/// Exact filter the approximations are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reference {
    /// Banded Cholesky solve of `(I + mu L) x = y`.
    #[default]
    Direct,
    /// Dense eigendecomposition.
    Eig,
}

impl FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Reference::Direct),
            "eig" | "exact" => Ok(Reference::Eig),
            _ => Err(Error::invalid(format!(
                "unknown reference {s:?} (direct|eig)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ApproxMethod {
    Lanczos,
    Chebyshev,
}

impl ApproxMethod {
    pub fn name(self) -> &'static str {
        match self {
            ApproxMethod::Lanczos => "lanczos",
            ApproxMethod::Chebyshev => "chebyshev",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxBenchConfig {
    pub trials: usize,
    pub orders: Vec<usize>,
    /// Nodes per graph; must be a perfect square.
    pub nodes: usize,
    pub mu: f64,
    pub seed: u64,
    pub reference: Reference,
    pub timing: bool,
}

impl Default for ApproxBenchConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            orders: (1..=20).collect(),
            nodes: 36 * 36,
            mu: 0.5,
            seed: 0,
            reference: Reference::Direct,
            timing: false,
        }
    }
}

impl ApproxBenchConfig {
    fn side(&self) -> Result<usize> {
        if self.nodes > DENSE_EIGEN_CAP {
            return Err(Error::DenseCapExceeded {
                n: self.nodes,
                cap: DENSE_EIGEN_CAP,
            });
        }
        let side = (self.nodes as f64).sqrt().round() as usize;
        if side == 0 || side * side != self.nodes {
            return Err(Error::invalid(format!(
                "node count must be a positive perfect square, got {}",
                self.nodes
            )));
        }
        Ok(side)
    }

    pub fn validate(&self) -> Result<()> {
        self.side()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(Error::invalid(
                "orders must be a nonempty list of positive integers",
            ));
        }
        if let Some(&m) = self.orders.iter().find(|&&m| m > self.nodes) {
            return Err(Error::invalid(format!(
                "order {m} exceeds node count {}",
                self.nodes
            )));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRow {
    pub method: ApproxMethod,
    pub order: usize,
    pub mean_mse: f64,
    /// `mean_mse` divided by the mean signal energy `mean(y^2)`.
    pub rel_mse: f64,
    pub median_apply_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport {
    pub config: ApproxBenchConfig,
    pub rows: Vec<ApproxRow>,
}

impl ApproxReport {
    pub fn row(&self, method: ApproxMethod, order: usize) -> Option<&ApproxRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.order == order)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(APPROX_HEADER);
        out.push('\n');
        for r in &self.rows {
            let timing = r
                .median_apply_us
                .map(|t| format!("{t:.3}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{:e},{:e},{}",
                r.method.name(),
                r.order,
                r.mean_mse,
                r.rel_mse,
                timing
            );
        }
        out
    }
}

/// Random benchmark instance: grid graph weighted by handcrafted features of
/// a uniform-random patch, plus an independent uniform-random signal.
pub fn random_instance(side: usize, seed: u64, trial: u64) -> Result<(Laplacian, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let n = side * side;
    let patch = Patch::new(side, side, (0..n).map(|_| rng.random()).collect())?;
    let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let features = handcrafted_features(&patch, DEFAULT_LOCATION_SCALE, DEFAULT_INTENSITY_SCALE);
    let graph = compute_edge_weights(&build_topology(side, side)?, &features, DEFAULT_EPSILON)?;
    Ok((Laplacian::from_graph(&graph)?, y))
}

fn exact_output(lap: &Laplacian, y: &[f64], mu: f64, reference: Reference) -> Result<Vec<f64>> {
    match reference {
        Reference::Direct => filter_direct(lap, y, mu),
        Reference::Eig => filter_exact_eig(lap, y, mu),
    }
}

fn approx_output(
    lap: &Laplacian,
    y: &[f64],
    mu: f64,
    method: ApproxMethod,
    order: usize,
) -> Result<Vec<f64>> {
    match method {
        ApproxMethod::Lanczos => filter_lanczos(lap, y, mu, order),
        ApproxMethod::Chebyshev => filter_chebyshev(lap, y, mu, order, lap.gershgorin_bound()),
    }
}

fn mean_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / a.len() as f64
}

const METHODS: [ApproxMethod; 2] = [ApproxMethod::Lanczos, ApproxMethod::Chebyshev];

struct TrialResult {
    energy: f64,
    /// Per method, per order.
    mse: Vec<Vec<f64>>,
}

fn run_trial(config: &ApproxBenchConfig, side: usize, trial: usize) -> Result<TrialResult> {
    let (lap, y) = random_instance(side, config.seed, trial as u64)?;
    let exact = exact_output(&lap, &y, config.mu, config.reference)?;
    let mse = METHODS
        .iter()
        .map(|&m| {
            config
                .orders
                .iter()
                .map(|&order| {
                    Ok(mean_sq_diff(
                        &approx_output(&lap, &y, config.mu, m, order)?,
                        &exact,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialResult {
        energy: y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64,
        mse,
    })
}

fn median_apply_us(
    lap: &Laplacian,
    y: &[f64],
    mu: f64,
    method: ApproxMethod,
    order: usize,
) -> Result<f64> {
    let mut samples = Vec::with_capacity(TIMING_REPEATS);
    for _ in 0..TIMING_REPEATS {
        let start = Instant::now();
        std::hint::black_box(approx_output(lap, y, mu, method, order)?);
        samples.push(start.elapsed().as_secs_f64() * 1e6);
    }
    samples.sort_by(f64::total_cmp);
    Ok(samples[TIMING_REPEATS / 2])
}

/// Mean approximation error of Lanczos and Chebyshev filters per order.
/// Trials run under `exec`; their results are merged in trial order.
pub fn bench_approx(config: &ApproxBenchConfig, exec: Execution) -> Result<ApproxReport> {
    config.validate()?;
    let side = config.side()?;
    let trials: Vec<usize> = (0..config.trials).collect();
    let results = map_indexed(exec, &trials, |_, &t| run_trial(config, side, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let count = results.len() as f64;
    let energy = results.iter().map(|r| r.energy).sum::<f64>() / count;
    let timing_instance = if config.timing {
        Some(random_instance(side, config.seed, 0)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for (mi, &method) in METHODS.iter().enumerate() {
        for (oi, &order) in config.orders.iter().enumerate() {
            let mean_mse = results.iter().map(|r| r.mse[mi][oi]).sum::<f64>() / count;
            let median_apply_us = match &timing_instance {
                Some((lap, y)) => Some(median_apply_us(lap, y, config.mu, method, order)?),
                None => None,
            };
            rows.push(ApproxRow {
                method,
                order,
                mean_mse,
                rel_mse: mean_mse / energy,
                median_apply_us,
            });
        }
    }
    Ok(ApproxReport {
        config: config.clone(),
        rows,
    })
}

/// Quality of a denoised image against its clean source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseMetrics {
    pub psnr_in: f64,
    pub psnr_out: f64,
    pub ssim_in: f64,
    pub ssim_out: f64,
}

impl DenoiseMetrics {
    pub fn measure(
        clean: &ImageBuffer,
        noisy: &ImageBuffer,
        denoised: &ImageBuffer,
    ) -> Result<Self> {
        Ok(Self {
            psnr_in: psnr(clean, noisy)?,
            psnr_out: psnr(clean, denoised)?,
            ssim_in: ssim(clean, noisy)?,
            ssim_out: ssim(clean, denoised)?,
        })
    }

    pub fn psnr_gain(&self) -> f64 {
        self.psnr_out - self.psnr_in
    }

    /// `key=value` lines.
    pub fn to_lines(&self) -> String {
        format!(
            "psnr_in={:.6}\npsnr_out={:.6}\nssim_in={:.6}\nssim_out={:.6}\n",
            self.psnr_in, self.psnr_out, self.ssim_in, self.ssim_out
        )
    }
}

/// Add noise to `clean`, denoise, and measure.
pub fn denoise_and_measure(
    clean: &ImageBuffer,
    sigma: f64,
    seed: u64,
    config: &DenoiserConfig,
    exec: Execution,
) -> Result<(ImageBuffer, DenoiseMetrics)> {
    let noisy = add_awgn(clean, sigma, seed)?;
    let denoised = denoise_image(&noisy, config, exec)?;
    let metrics = DenoiseMetrics::measure(clean, &noisy, &denoised)?;
    Ok((denoised, metrics))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub metrics: DenoiseMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Row with the highest output PSNR; earliest wins ties.
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&SweepRow>, r| match best {
                Some(b) if b.metrics.psnr_out >= r.metrics.psnr_out => Some(b),
                _ => Some(r),
            })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{:e},{:.6},{:.6},{:.6},{:.6}",
                r.mu, m.psnr_in, m.psnr_out, m.ssim_in, m.ssim_out
            );
        }
        out
    }
}

/// Denoise one noisy realization of `clean` at each fixed mu in `grid`.
pub fn sweep_mu(
    clean: &ImageBuffer,
    sigma: f64,
    seed: u64,
    grid: &[f64],
    base: &DenoiserConfig,
    exec: Execution,
) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::invalid("mu grid is empty"));
    }
    let noisy = add_awgn(clean, sigma, seed)?;
    let rows = grid
        .iter()
        .map(|&mu| {
            let config = DenoiserConfig {
                mu: MuSource::Fixed(mu),
                ..base.clone()
            };
            let denoised = denoise_image(&noisy, &config, exec)?;
            Ok(SweepRow {
                mu,
                metrics: DenoiseMetrics::measure(clean, &noisy, &denoised)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { rows })
}

/// Log-spaced grid from `10^lo` to `10^hi` with `per_decade` points per decade.
pub fn log_grid(lo: i32, hi: i32, per_decade: usize) -> Vec<f64> {
    let steps = ((hi - lo).max(0) as usize) * per_decade.max(1);
    (0..=steps)
        .map(|k| 10f64.powf(lo as f64 + k as f64 / per_decade.max(1) as f64))
        .collect()
}

pub fn write_text(path: Option<&std::path::Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => io::Write::write_all(&mut io::stdout().lock(), text.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize, nodes: usize, orders: Vec<usize>) -> ApproxBenchConfig {
        ApproxBenchConfig {
            trials,
            orders,
            nodes,
            seed: 3,
            ..ApproxBenchConfig::default()
        }
    }

    #[test]
    fn full_order_lanczos_is_exact() {
        let report = bench_approx(&small(5, 36, vec![2, 36]), Execution::Sequential).unwrap();
        assert!(report.row(ApproxMethod::Lanczos, 36).unwrap().mean_mse <= 1e-10);
        assert!(report.row(ApproxMethod::Lanczos, 2).unwrap().mean_mse > 1e-10);
    }

    #[test]
    fn references_agree() {
        let mut cfg = small(3, 64, vec![1, 4, 8]);
        let direct = bench_approx(&cfg, Execution::Sequential).unwrap();
        cfg.reference = Reference::Eig;
        let eig = bench_approx(&cfg, Execution::Sequential).unwrap();
        for (a, b) in direct.rows.iter().zip(&eig.rows) {
            assert!((a.mean_mse - b.mean_mse).abs() <= 1e-12 * (1.0 + a.mean_mse));
        }
    }

    #[test]
    fn csv_is_deterministic_across_modes() {
        let cfg = small(8, 49, vec![1, 2, 3]);
        let a = bench_approx(&cfg, Execution::Sequential).unwrap().to_csv();
        let b = bench_approx(&cfg, Execution::Parallel).unwrap().to_csv();
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines[0], APPROX_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 3);
        assert!(lines[1].starts_with("lanczos,1,") && lines[1].ends_with(','));
    }

    #[test]
    fn timing_column_is_filled_on_request() {
        let mut cfg = small(1, 16, vec![2]);
        cfg.timing = true;
        let report = bench_approx(&cfg, Execution::Sequential).unwrap();
        assert!(report
            .rows
            .iter()
            .all(|r| r.median_apply_us.unwrap() >= 0.0));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(
            small(1, 37 * 37, vec![1]).validate(),
            Err(Error::DenseCapExceeded { .. })
        ));
        assert!(small(1, 30, vec![1]).validate().is_err());
        assert!(small(1, 16, vec![17]).validate().is_err());
        assert!(small(1, 16, vec![0]).validate().is_err());
        assert!(small(0, 16, vec![1]).validate().is_err());
    }

    #[test]
    fn instances_depend_on_trial_and_seed() {
        let (l0, y0) = random_instance(4, 1, 0).unwrap();
        let (l1, y1) = random_instance(4, 1, 1).unwrap();
        let (l0b, y0b) = random_instance(4, 1, 0).unwrap();
        assert_eq!((l0.diagonal(), &y0), (l0b.diagonal(), &y0b));
        assert_ne!(y0, y1);
        assert_ne!(l0.diagonal(), l1.diagonal());
    }

    #[test]
    fn tiny_mu_sweep_matches_input_psnr() {
        let clean = crate::imaging::synth::test_image("shapes", 36).unwrap();
        let report = sweep_mu(
            &clean,
            25.0,
            1,
            &[1e-15],
            &DenoiserConfig::default(),
            Execution::Sequential,
        )
        .unwrap();
        let m = report.rows[0].metrics;
        assert!((m.psnr_out - m.psnr_in).abs() < 1e-6);
        assert!(report.to_csv().starts_with(SWEEP_HEADER));
    }

    #[test]
    fn best_row_and_grid() {
        let g = log_grid(-2, 1, 2);
        assert_eq!(g.len(), 7);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[6] - 10.0).abs() < 1e-12);
        let row = |mu, p| SweepRow {
            mu,
            metrics: DenoiseMetrics {
                psnr_in: 20.0,
                psnr_out: p,
                ssim_in: 0.5,
                ssim_out: 0.6,
            },
        };
        let r = SweepReport {
            rows: vec![row(0.1, 21.0), row(1.0, 25.0), row(10.0, 25.0)],
        };
        assert_eq!(r.best().unwrap().mu, 1.0);
    }
}
