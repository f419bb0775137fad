use std::path::Path;
use std::process::{Command, Output};

use dgtv::denoiser::{write_mu, MuTable};
use dgtv::graph::{handcrafted_features, write_feature_file};
use dgtv::imaging::{load_image, save_image, synth::test_image};

fn dgtv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgtv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn metric(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing {key} in {text:?}"))
        .parse()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn identity_path_keeps_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.pgm");
    let res = dgtv(&[
        "denoise",
        "--input",
        "synth:shapes",
        "--output",
        p(&out),
        "--sigma",
        "0",
        "--mu",
        "1e-15",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let text = stdout(&res);
    assert!(metric(&text, "psnr_out") >= 90.0);
    assert_eq!(
        load_image(&out).unwrap(),
        test_image("shapes", 144).unwrap()
    );
}

#[test]
fn metrics_lines_and_improvement() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.pgm");
    let res = dgtv(&[
        "denoise",
        "--input",
        "synth:shapes",
        "--output",
        p(&out),
        "--sigma",
        "25",
        "--seed",
        "7",
    ]);
    assert!(res.status.success());
    let text = stdout(&res);
    let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
    assert_eq!(keys, ["psnr_in", "psnr_out", "ssim_in", "ssim_out"]);
    assert!(metric(&text, "psnr_out") > metric(&text, "psnr_in"));
    assert!(metric(&text, "ssim_out") > metric(&text, "ssim_in"));
}

#[test]
fn reads_netpbm_files_and_writes_noisy_copy() {
    let dir = tempfile::tempdir().unwrap();
    let res = dgtv(&["synth", "--dir", p(dir.path()), "--size", "72"]);
    assert!(res.status.success());
    for name in ["shapes", "text", "gradient", "checker"] {
        assert!(dir.path().join(format!("{name}.pgm")).exists());
    }
    let color = dir.path().join("color.ppm");
    let gray = load_image(dir.path().join("gradient.pgm")).unwrap();
    let planes = vec![gray.plane(0); 3];
    save_image(
        &dgtv::imaging::ImageBuffer::from_planes(&planes).unwrap(),
        &color,
    )
    .unwrap();
    let out = dir.path().join("out.ppm");
    let noisy = dir.path().join("noisy.ppm");
    let res = dgtv(&[
        "denoise",
        "--input",
        p(&color),
        "--output",
        p(&out),
        "--noisy",
        p(&noisy),
        "--sigma",
        "10",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    assert_eq!(load_image(&out).unwrap().channels(), 3);
    assert_eq!(load_image(&noisy).unwrap().channels(), 3);
}

#[test]
fn consumes_feature_and_mu_files() {
    let dir = tempfile::tempdir().unwrap();
    let clean = test_image("checker", 144).unwrap();
    let feat = dir.path().join("f.bin");
    write_feature_file(&handcrafted_features(&clean.plane(0), 0.1, 1.0), &feat).unwrap();
    let mu = dir.path().join("mu.bin");
    write_mu(&MuTable::new(vec![0.5]).unwrap(), &mu).unwrap();
    let per_patch = dir.path().join("mu16.bin");
    write_mu(
        &MuTable::new((0..32).map(|k| 0.1 + 0.01 * k as f32).collect()).unwrap(),
        &per_patch,
    )
    .unwrap();
    let out = dir.path().join("out.pgm");

    let res = dgtv(&[
        "denoise",
        "--input",
        "synth:checker",
        "--output",
        p(&out),
        "--features",
        p(&feat),
        "--mu",
        p(&mu),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let two_layers = format!("{},{}", p(&feat), p(&feat));
    let res = dgtv(&[
        "denoise",
        "--input",
        "synth:checker",
        "--output",
        p(&out),
        "--layers",
        "2",
        "--features",
        &two_layers,
        "--mu",
        p(&per_patch),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let mut bytes = std::fs::read(&feat).unwrap();
    bytes[0] = b'X';
    std::fs::write(&feat, bytes).unwrap();
    let res = dgtv(&[
        "denoise",
        "--input",
        "synth:checker",
        "--output",
        p(&out),
        "--features",
        p(&feat),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(!res.stderr.is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.pgm");
    let missing = dir.path().join("missing.pgm");
    assert_eq!(
        dgtv(&["denoise", "--input", p(&missing), "--output", p(&out)])
            .status
            .code(),
        Some(1)
    );
    let unwritable = dir.path().join("no/such/dir/out.pgm");
    assert_eq!(
        dgtv(&[
            "denoise",
            "--input",
            "synth:text",
            "--output",
            p(&unwritable)
        ])
        .status
        .code(),
        Some(1)
    );
    for bad in [
        vec![
            "denoise",
            "--input",
            "synth:text",
            "--output",
            p(&out),
            "--solver",
            "magic",
        ],
        vec![
            "denoise",
            "--input",
            "synth:text",
            "--output",
            p(&out),
            "--mu",
            "-1",
        ],
        vec![
            "denoise",
            "--input",
            "synth:text",
            "--output",
            p(&out),
            "--blocks",
            "0",
        ],
        vec![
            "denoise",
            "--input",
            "synth:text",
            "--output",
            p(&out),
            "--stride",
            "50",
        ],
        vec!["denoise", "--input", "synth:nope", "--output", p(&out)],
        vec!["denoise", "--output", p(&out)],
        vec![
            "denoise",
            "--input",
            "synth:text",
            "--output",
            p(&out),
            "--sigma",
            "abc",
        ],
        vec!["bench-approx", "--nodes", "1369"],
        vec!["bench-approx", "--orders", "5..2"],
        vec!["frobnicate"],
    ] {
        let res = dgtv(&bad);
        assert_eq!(res.status.code(), Some(2), "{bad:?}");
        assert!(!res.stderr.is_empty());
    }
}

#[test]
fn bench_csv_schema_and_exactness() {
    let res = dgtv(&[
        "bench-approx",
        "--trials",
        "4",
        "--nodes",
        "36",
        "--orders",
        "3,36",
    ]);
    assert!(res.status.success());
    let text = stdout(&res);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,order,mean_mse,rel_mse,median_apply_us");
    assert_eq!(lines.len(), 5);
    let full: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(&full[..2], ["lanczos", "36"]);
    assert!(full[2].parse::<f64>().unwrap() <= 1e-10);

    let timed = stdout(&dgtv(&[
        "bench-approx",
        "--trials",
        "2",
        "--nodes",
        "16",
        "--orders",
        "2",
        "--timing",
    ]));
    let last = timed.lines().nth(1).unwrap().rsplit(',').next().unwrap();
    assert!(last.parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn sweep_with_vanishing_mu_matches_input() {
    let res = dgtv(&[
        "sweep-mu",
        "--input",
        "synth:gradient",
        "--mu-grid",
        "1e-15",
        "--seed",
        "4",
    ]);
    assert!(res.status.success());
    let text = stdout(&res);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "mu,psnr_in,psnr_out,ssim_in,ssim_out"
    );
    let cols: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((cols[1] - cols[2]).abs() < 1e-4);
}
