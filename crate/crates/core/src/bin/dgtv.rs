use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dgtv::bench::{
    bench_approx, denoise_and_measure, log_grid, sweep_mu, write_text, ApproxBenchConfig, Reference,
};
use dgtv::denoiser::{load_mu, DenoiserConfig, FeatureSource, MuSource};
use dgtv::graph::{read_feature_file, DEFAULT_EPSILON, DEFAULT_RHO};
use dgtv::imaging::synth::{test_image, TEST_IMAGE_NAMES, TEST_IMAGE_SIZE};
use dgtv::imaging::{load_image, save_image, ImageBuffer};
use dgtv::parallel::{with_threads, Execution};
use dgtv::spectral::{FilterMethod, FilterSpec, DEFAULT_ORDER};
use dgtv::Error;

#[derive(Parser)]
#[command(
    name = "dgtv",
    version,
    about = "Graph total variation image denoising"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add noise to an image, denoise it and report PSNR/SSIM.
    Denoise(DenoiseArgs),
    /// Compare Lanczos and Chebyshev filter approximations on random graphs.
    BenchApprox(BenchArgs),
    /// Denoise at each mu of a grid and tabulate PSNR/SSIM.
    SweepMu(SweepArgs),
    /// Write the built-in synthetic test images as PGM files.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct PipelineArgs {
    /// Noise level on the 0-255 scale.
    #[arg(long, default_value_t = 25.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    layers: usize,
    #[arg(long, default_value_t = 6)]
    blocks: usize,
    /// `handcrafted`, or DGTVFEAT files (comma-separated, one per layer).
    #[arg(long, default_value = "handcrafted")]
    features: String,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,
    /// exact | cg | lanczos | chebyshev
    #[arg(long, default_value = "lanczos")]
    solver: String,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = 36)]
    patch_size: usize,
    /// Defaults to the patch size.
    #[arg(long)]
    stride: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value_t = 0.1)]
    location_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    intensity_scale: f64,
}

#[derive(Args)]
struct DenoiseArgs {
    /// PGM/PPM image, or `synth:<name>` for a built-in test image.
    #[arg(long)]
    input: String,
    #[arg(long)]
    output: PathBuf,
    /// Also write the noisy image here.
    #[arg(long)]
    noisy: Option<PathBuf>,
    /// Scalar mu, or a DGTVMU__ file.
    #[arg(long, default_value = "0.5")]
    mu: String,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Comma-separated orders and ranges, e.g. `1..20` or `1,2,5..8`.
    #[arg(long, default_value = "1..20")]
    orders: String,
    #[arg(long, default_value_t = 1296)]
    nodes: usize,
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// direct | eig
    #[arg(long, default_value = "direct")]
    reference: String,
    /// Fill the median_apply_us column (not reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: String,
    /// Comma-separated mu values; defaults to 1e-2..1e2, four per decade.
    #[arg(long)]
    mu_grid: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, default_value_t = TEST_IMAGE_SIZE)]
    size: usize,
}

enum Failure {
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn load_input(spec: &str) -> Result<ImageBuffer, Failure> {
    if let Some(name) = spec.strip_prefix("synth:") {
        return test_image(name, TEST_IMAGE_SIZE).ok_or_else(|| {
            usage(format!(
                "unknown test image {name:?}; known: {}",
                TEST_IMAGE_NAMES.join(", ")
            ))
        });
    }
    load_image(spec).map_err(|e| match e {
        Error::Io(io) => io_error(Path::new(spec), io),
        other => Failure::Io(format!("{spec}: {other}")),
    })
}

fn parse_orders(s: &str) -> Result<Vec<usize>, Failure> {
    let mut orders = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || usage(format!("invalid order list {s:?}"));
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.parse().map_err(|_| bad())?;
            let b: usize = b.trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            orders.extend(a..=b);
        } else {
            orders.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(orders)
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("invalid {what} value {v:?}")))
        })
        .collect()
}

fn build_config(p: &PipelineArgs, mu: MuSource) -> Result<DenoiserConfig, Failure> {
    let method: FilterMethod = p.solver.parse()?;
    let filter = FilterSpec::new(0.5, method)?.with_order(p.order);
    let features = if p.features == "handcrafted" {
        FeatureSource::Handcrafted {
            location_scale: p.location_scale,
            intensity_scale: p.intensity_scale,
        }
    } else {
        let maps = p
            .features
            .split(',')
            .map(|path| read_feature_file(path).map_err(|e| Failure::Io(format!("{path}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        FeatureSource::Maps(maps)
    };
    let config = DenoiserConfig {
        layers: p.layers,
        blocks_per_layer: p.blocks,
        epsilon: p.epsilon,
        rho: p.rho,
        filter,
        features,
        mu,
        patch_size: p.patch_size,
        stride: p.stride.unwrap_or(p.patch_size),
    };
    config.validate()?;
    Ok(config)
}

fn parse_mu(s: &str) -> Result<MuSource, Failure> {
    if let Ok(v) = s.parse::<f64>() {
        return Ok(MuSource::Fixed(v));
    }
    load_mu(s)
        .map(MuSource::Table)
        .map_err(|e| Failure::Io(format!("{s}: {e}")))
}

fn execution(threads: usize) -> Execution {
    if threads == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn denoise(args: DenoiseArgs) -> Result<(), Failure> {
    let clean = load_input(&args.input)?;
    let config = build_config(&args.pipeline, parse_mu(&args.mu)?)?;
    let p = &args.pipeline;
    let (denoised, metrics) = with_threads(p.threads, || {
        denoise_and_measure(&clean, p.sigma, p.seed, &config, execution(p.threads))
    })?;
    save_image(&denoised, &args.output)
        .map_err(|e| Failure::Io(format!("{}: {e}", args.output.display())))?;
    if let Some(path) = &args.noisy {
        let noisy = dgtv::imaging::add_awgn(&clean, p.sigma, p.seed)?;
        save_image(&noisy, path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    print!("{}", metrics.to_lines());
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let config = ApproxBenchConfig {
        trials: args.trials,
        orders: parse_orders(&args.orders)?,
        nodes: args.nodes,
        mu: args.mu,
        seed: args.seed,
        reference: args.reference.parse::<Reference>()?,
        timing: args.timing,
    };
    config.validate()?;
    let report = with_threads(args.threads, || {
        bench_approx(&config, execution(args.threads))
    })?;
    write_text(args.output.as_deref(), &report.to_csv())
        .map_err(|e| Failure::Io(format!("writing report: {e}")))
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let clean = load_input(&args.input)?;
    let grid = match &args.mu_grid {
        Some(s) => parse_floats(s, "mu")?,
        None => log_grid(-2, 2, 4),
    };
    let config = build_config(&args.pipeline, MuSource::Fixed(grid[0]))?;
    let p = &args.pipeline;
    let report = with_threads(p.threads, || {
        sweep_mu(
            &clean,
            p.sigma,
            p.seed,
            &grid,
            &config,
            execution(p.threads),
        )
    })?;
    write_text(args.output.as_deref(), &report.to_csv())
        .map_err(|e| Failure::Io(format!("writing report: {e}")))
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    std::fs::create_dir_all(&args.dir).map_err(|e| io_error(&args.dir, e))?;
    for name in TEST_IMAGE_NAMES {
        let img = test_image(name, args.size).ok_or_else(|| usage("invalid size"))?;
        let path = args.dir.join(format!("{name}.pgm"));
        save_image(&img, &path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Denoise(a) => denoise(a),
        Command::BenchApprox(a) => bench(a),
        Command::SweepMu(a) => sweep(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
