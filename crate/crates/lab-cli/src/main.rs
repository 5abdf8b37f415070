mod config;
mod run;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

use config::ExperimentConfig;
use run::{emit_report, RunError};

/// Experiment runner for the model-space numerics library.
#[derive(Parser, Debug)]
#[command(name = "lab", version)]
struct Args {
    /// Experiment configuration (TOML, one experiment per file).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for tables, series, and the manifest.
    #[arg(long)]
    out: PathBuf,
    /// Override the configured grid size N.
    #[arg(long)]
    grid_override: Option<usize>,
    /// Override the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Re-run at doubled grid/quadrature and emit self-convergence deltas.
    #[arg(long)]
    verify: bool,
}

fn main() {
    let args = Args::parse();
    match run_cli(&args) {
        Ok(()) => {}
        Err(e) => {
            // machine-readable error record on stderr and, best effort, disk
            let record = format!(
                "status = error\nclass = {}\nmessage = {}\n",
                e.class(),
                e
            );
            eprint!("{record}");
            let _ = std::fs::create_dir_all(&args.out)
                .and_then(|_| std::fs::write(args.out.join("error.txt"), &record));
            std::process::exit(e.exit_code());
        }
    }
}

fn run_cli(args: &Args) -> Result<(), RunError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(n) = args.grid_override {
        cfg.grid.n = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let started = Instant::now();
    let mut output = if args.verify { run::run_verified(&cfg)? } else { run::run(&cfg)? };
    if let Some(n) = args.grid_override {
        output.manifest.push(("grid_override".into(), n.to_string()));
    }
    let cfg_echo = std::fs::read_to_string(&args.config)
        .map_err(|e| RunError::Io(args.config.display().to_string(), e))?;
    let manifest = emit_report(&args.out, &cfg_echo, &output, started.elapsed())?;
    println!("ok: {}", manifest.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::fmt_f64;
    use std::fs;
    use tempfile::TempDir;

    fn run_with(config: &str, extra: &[&str]) -> (TempDir, PathBuf) {
        let dir = TempDir::new().unwrap();
        let cfg_path = dir.path().join("exp.toml");
        fs::write(&cfg_path, config).unwrap();
        let out = dir.path().join("out");
        let mut argv = vec![
            "lab".to_string(),
            "--config".into(),
            cfg_path.display().to_string(),
            "--out".into(),
            out.display().to_string(),
        ];
        argv.extend(extra.iter().map(|s| s.to_string()));
        let args = Args::parse_from(argv);
        run_cli(&args).unwrap();
        (dir, out)
    }

    #[test]
    fn entropy_two_point_set() {
        let cfg = r#"
kind = "ENTROPY"
[[measure.atoms]]
angle = 0.0
mass = 1.0
[[measure.atoms]]
angle = 0.5
mass = 1.0
"#;
        let (_dir, out) = run_with(cfg, &[]);
        let table = fs::read_to_string(out.join("entropy.csv")).unwrap();
        let mut lines = table.lines();
        assert_eq!(lines.next().unwrap(), "piece,entropy,tail_bound,converges");
        let row = lines.next().unwrap();
        let entropy: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((entropy - std::f64::consts::LN_2).abs() < 1e-12, "{row}");
    }

    #[test]
    fn decompose_classifies_and_conserves_mass() {
        let cfg = r#"
kind = "DECOMPOSE"
[[measure.atoms]]
angle = 0.25
mass = 0.5
[[measure.components]]
family = "GEOMETRIC"
r = 0.3333333333333333
base_len = 0.5
depth = 12
mass = 0.25
[[measure.components]]
family = "POLYLOG"
beta = 1.0
base_len = 0.8
depth = 12
mass = 0.25
"#;
        let (_dir, out) = run_with(cfg, &[]);
        let table = fs::read_to_string(out.join("decompose.csv")).unwrap();
        assert!(table.contains(",atom,"));
        assert!(table.contains(",beurling_carleson,"));
        assert!(table.contains(",korenblum_roberts,"));
        let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
        assert!(manifest.contains("mass_conserved = true"));
        assert!(manifest.contains(&format!("mass_nu_k = {}", fmt_f64(0.25))));
    }

    #[test]
    fn approx_kernel_errors_decrease() {
        let cfg = r#"
kind = "APPROX_KERNEL"
smoothing_ns = [2, 4, 8]
lambdas = [[0.4, 0.0]]
[grid]
n = 4096
[[measure.atoms]]
angle = 0.0
mass = 1.0
"#;
        let (_dir, out) = run_with(cfg, &[]);
        let table = fs::read_to_string(out.join("approx_kernel_0.csv")).unwrap();
        let errs: Vec<f64> = table
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(errs.len(), 3);
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        assert!(out.join("series_approx_kernel_0.csv").exists());
    }

    #[test]
    fn approx_kernel_rejects_kr_measure() {
        let dir = TempDir::new().unwrap();
        let cfg_path = dir.path().join("exp.toml");
        fs::write(
            &cfg_path,
            r#"
kind = "APPROX_KERNEL"
smoothing_ns = [2]
lambdas = [[0.4, 0.0]]
[[measure.components]]
family = "POLYLOG"
beta = 1.0
base_len = 0.8
depth = 12
mass = 0.2
"#,
        )
        .unwrap();
        let out = dir.path().join("out");
        let args = Args::parse_from([
            "lab",
            "--config",
            &cfg_path.display().to_string(),
            "--out",
            &out.display().to_string(),
        ]);
        let err = run_cli(&args).unwrap_err();
        assert_eq!(err.class(), "hypothesis");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn empty_n_list_gives_header_only_table_and_warning() {
        let cfg = r#"
kind = "SMOOTHING_SUITE"
smoothing_ns = []
[grid]
n = 1024
[[measure.atoms]]
angle = 0.0
mass = 1.0
"#;
        let (_dir, out) = run_with(cfg, &[]);
        let table = fs::read_to_string(out.join("smoothing_suite.csv")).unwrap();
        assert_eq!(table.lines().count(), 1, "header only: {table:?}");
        let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
        assert!(manifest.contains("warning_0 = empty smoothing_ns"));
    }

    #[test]
    fn pairing_check_runs_and_reports_small_gaps() {
        let cfg = r#"
kind = "PAIRING_CHECK"
seed = 7
[pairing]
pairs = 10
max_degree = 8
p = 2.0
"#;
        let (_dir, out) = run_with(cfg, &[]);
        let table = fs::read_to_string(out.join("pairing_check.csv")).unwrap();
        assert_eq!(table.lines().count(), 12); // header + closed form + 10
        for line in table.lines().skip(1) {
            let gap: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!(gap < 1e-8, "{line}");
        }
    }

    #[test]
    fn determinism_byte_identical_reruns() {
        let cfg = r#"
kind = "CYCLICITY"
degrees = [2, 5]
[quadrature]
radial = 16
angular = 64
[[curves]]
label = "atom"
[[curves.measure.atoms]]
angle = 0.0
mass = 1.0
"#;
        let (_dir1, out1) = run_with(cfg, &[]);
        let (_dir2, out2) = run_with(cfg, &[]);
        for name in ["cyclicity.csv", "series_cyclicity_atom.csv", "manifest.txt"] {
            let a = fs::read(out1.join(name)).unwrap();
            let b = fs::read(out2.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between reruns");
        }
    }

    #[test]
    fn verify_appends_selfconv_deltas() {
        let cfg = r#"
kind = "CYCLICITY"
degrees = [2, 5]
[quadrature]
radial = 16
angular = 64
[[curves]]
label = "atom"
[[curves.measure.atoms]]
angle = 0.0
mass = 1.0
"#;
        let (_dir, out) = run_with(cfg, &["--verify"]);
        let table = fs::read_to_string(out.join("cyclicity.csv")).unwrap();
        for line in table.lines().skip(1) {
            let delta = line.rsplit(',').next().unwrap();
            let delta: f64 = delta.parse().expect("selfconv delta present");
            let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!(delta < (0.1 * value).max(1e-8), "{line}");
        }
        let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
        assert!(manifest.contains("selfconv_max_delta"));
    }

    #[test]
    fn grid_override_and_bad_config() {
        let cfg = r#"
kind = "SMOOTHING_SUITE"
smoothing_ns = [2]
[grid]
n = 4096
[[measure.atoms]]
angle = 0.0
mass = 1.0
"#;
        let (_dir, out) = run_with(cfg, &["--grid-override", "1024"]);
        let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
        assert!(manifest.contains("grid_n = 1024"));
        assert!(manifest.contains("grid_override = 1024"));

        // invalid grid exits with the config class
        let dir = TempDir::new().unwrap();
        let cfg_path = dir.path().join("exp.toml");
        fs::write(&cfg_path, cfg).unwrap();
        let args = Args::parse_from([
            "lab",
            "--config",
            &cfg_path.display().to_string(),
            "--out",
            &dir.path().join("out").display().to_string(),
            "--grid-override",
            "1000",
        ]);
        let err = run_cli(&args).unwrap_err();
        assert_eq!(err.class(), "config");
        assert_eq!(err.exit_code(), 2);
    }
}
