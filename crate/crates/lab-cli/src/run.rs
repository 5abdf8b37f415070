//! Experiment dispatch, table/series generation, and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use modelspace::bergman_lab::{
    cauchy_pairing_disc, cyclicity_profile, DiscFunction, DiscQuadrature,
};
use modelspace::boundary_measures::Certificate;
use modelspace::circle_harmonics::CircleGrid;
use modelspace::error::ModelError;
use modelspace::inner_functions::InnerFunction;
use modelspace::smoothing_pipeline::{
    approximate_kernel, build_profile, measure_support_set, smoothing_function,
};
use modelspace::C64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, ExperimentConfig, Kind};

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// A module rejected the experiment's hypotheses (e.g. a kernel pipeline
    /// on a measure with a Korenblum-Roberts part).
    Hypothesis(ModelError),
    Model(ModelError),
    Io(String, std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Hypothesis(e) => write!(f, "hypothesis violation: {e}"),
            RunError::Model(e) => write!(f, "{e}"),
            RunError::Io(path, e) => write!(f, "i/o failure at {path}: {e}"),
        }
    }
}

impl RunError {
    pub fn class(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Hypothesis(_) => "hypothesis",
            RunError::Model(_) => "model",
            RunError::Io(..) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Hypothesis(_) => 3,
            _ => 1,
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<ModelError> for RunError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::KorenblumRobertsPart(_)
            | ModelError::DecompositionRequired(_)
            | ModelError::NotBeurlingCarleson(_) => RunError::Hypothesis(e),
            other => RunError::Model(other),
        }
    }
}

/// A comma-separated table with a fixed header.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: &'static str,
    pub rows: Vec<String>,
}

impl Table {
    fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

/// Plot-ready `(x, y)` series.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Everything a run produces before it is written to disk.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub series: Vec<Series>,
    /// Sorted into the manifest verbatim.
    pub manifest: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

/// Deterministic float rendering used in every emitted file.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.12e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => String::new(),
    }
}

/// Runs the configured experiment at the configured resolution.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let mut out = RunOutput::default();
    out.manifest.push(("kind".into(), cfg.kind.tag().into()));
    out.manifest.push(("artifact_version".into(), ARTIFACT_VERSION.to_string()));
    out.manifest.push(("seed".into(), cfg.seed.to_string()));
    out.manifest.push(("grid_n".into(), cfg.grid.n.to_string()));
    out.manifest.push((
        "quadrature".into(),
        format!("{}x{}", cfg.quadrature.radial, cfg.quadrature.angular),
    ));
    match cfg.kind {
        Kind::Entropy => run_entropy(cfg, &mut out)?,
        Kind::Decompose => run_decompose(cfg, &mut out)?,
        Kind::ApproxKernel => run_approx_kernel(cfg, &mut out, cfg.grid.n)?,
        Kind::Cyclicity => {
            run_cyclicity(cfg, &mut out, cfg.quadrature.radial, cfg.quadrature.angular)?
        }
        Kind::PairingCheck => {
            run_pairing(cfg, &mut out, cfg.quadrature.radial, cfg.quadrature.angular)?
        }
        Kind::SmoothingSuite => run_smoothing_suite(cfg, &mut out, cfg.grid.n)?,
    }
    Ok(out)
}

/// Runs the experiment again at doubled grid/quadrature and annotates the
/// primary column of each table with self-convergence deltas.
pub fn run_verified(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut base = run(cfg)?;
    let doubled: Option<RunOutput> = match cfg.kind {
        // Entropy and decomposition verdicts are analytic per family; there
        // is no resolution to double.
        Kind::Entropy | Kind::Decompose => None,
        Kind::ApproxKernel => {
            let mut o = RunOutput::default();
            run_approx_kernel(cfg, &mut o, cfg.grid.n * 2)?;
            Some(o)
        }
        Kind::Cyclicity => {
            let mut o = RunOutput::default();
            run_cyclicity(cfg, &mut o, cfg.quadrature.radial * 2, cfg.quadrature.angular * 2)?;
            Some(o)
        }
        Kind::PairingCheck => {
            let mut o = RunOutput::default();
            run_pairing(cfg, &mut o, cfg.quadrature.radial * 2, cfg.quadrature.angular * 2)?;
            Some(o)
        }
        Kind::SmoothingSuite => {
            let mut o = RunOutput::default();
            run_smoothing_suite(cfg, &mut o, cfg.grid.n * 2)?;
            Some(o)
        }
    };
    match doubled {
        None => {
            base.manifest.push(("selfconv".into(), "exact".into()));
        }
        Some(fine) => {
            let mut max_delta = 0.0f64;
            for (coarse_t, fine_t) in base.tables.iter_mut().zip(&fine.tables) {
                for (row, fine_row) in coarse_t.rows.iter_mut().zip(&fine_t.rows) {
                    // primary column = last column before selfconv_delta,
                    // tagged per row as `...,<primary>,` trailing empty slot
                    let (coarse_v, fine_v) = match (
                        primary_value(row),
                        primary_value(fine_row),
                    ) {
                        (Some(a), Some(b)) => (a, b),
                        _ => continue,
                    };
                    let delta = (coarse_v - fine_v).abs();
                    max_delta = max_delta.max(delta);
                    debug_assert!(row.ends_with(','));
                    row.push_str(&fmt_f64(delta));
                }
            }
            base.manifest.push(("selfconv_max_delta".into(), fmt_f64(max_delta)));
        }
    }
    Ok(base)
}

/// The self-convergence column compares the second table column (each table
/// puts its headline quantity there).
fn primary_value(row: &str) -> Option<f64> {
    row.split(',').nth(1)?.parse().ok()
}

fn run_entropy(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let measure = cfg.measure.build()?;
    let mut table = Table {
        name: "entropy.csv".into(),
        header: "piece,entropy,tail_bound,converges",
        rows: Vec::new(),
    };
    if !measure.atoms.is_empty() {
        let pts: Vec<f64> = measure.atoms.iter().map(|&(t, _)| t).collect();
        let set = modelspace::boundary_measures::ArcSet::from_points(&pts)?;
        table.rows.push(format!("points,{},{},true", fmt_f64(set.entropy()), fmt_f64(0.0)));
    }
    for (i, c) in measure.components.iter().enumerate() {
        let rep = c.schedule.entropy_report();
        table.rows.push(format!(
            "component_{i},{},{},{}",
            fmt_f64(rep.partial_sum),
            fmt_f64(rep.tail_bound),
            rep.converges
        ));
    }
    out.tables.push(table);
    Ok(())
}

fn run_decompose(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let measure = cfg.measure.build()?;
    let dec = measure.decompose()?;
    let mut table = Table {
        name: "decompose.csv".into(),
        header: "piece,mass,class,detail",
        rows: Vec::new(),
    };
    for (i, cert) in dec.certificates.iter().enumerate() {
        let (mass, class, detail) = match cert {
            Certificate::Atom { position, mass } => {
                (*mass, "atom", format!("angle={}", fmt_f64(*position)))
            }
            Certificate::BeurlingCarlesonComponent { mass, entropy } => (
                *mass,
                "beurling_carleson",
                format!(
                    "entropy={};tail={}",
                    fmt_f64(entropy.partial_sum),
                    fmt_f64(entropy.tail_bound)
                ),
            ),
            Certificate::KorenblumRobertsComponent { mass, witness } => {
                let last = witness.partial_sums.last().copied().unwrap_or((0, 0.0));
                (
                    *mass,
                    "korenblum_roberts",
                    format!("partial_entropy_depth_{}={}", last.0, fmt_f64(last.1)),
                )
            }
        };
        table.rows.push(format!("piece_{i},{},{class},{detail}", fmt_f64(mass)));
    }
    out.tables.push(table);
    out.manifest.push(("mass_total".into(), fmt_f64(measure.total_mass())));
    out.manifest.push(("mass_nu_c".into(), fmt_f64(dec.nu_c.total_mass())));
    out.manifest.push(("mass_nu_k".into(), fmt_f64(dec.nu_k.total_mass())));
    let conserved =
        dec.nu_c.total_mass() + dec.nu_k.total_mass() == measure.total_mass();
    out.manifest.push(("mass_conserved".into(), conserved.to_string()));
    Ok(())
}

fn run_approx_kernel(
    cfg: &ExperimentConfig,
    out: &mut RunOutput,
    grid_n: usize,
) -> Result<(), RunError> {
    let measure = cfg.measure.build()?;
    let theta = InnerFunction::from_measure(measure)?;
    let grid = CircleGrid::new(grid_n)?;
    if cfg.smoothing_ns.is_empty() {
        out.warnings.push("empty smoothing_ns: emitting header-only tables".into());
    }
    for (i, lambda) in cfg.lambda_points().iter().enumerate() {
        let report = approximate_kernel(
            &theta,
            *lambda,
            &cfg.smoothing_ns,
            grid,
            cfg.profile.alpha,
            cfg.profile.c,
        )?;
        let mut table = Table {
            name: format!("approx_kernel_{i}.csv"),
            header: "n,h2_error,membership_residual,decay_exponent,selfconv_delta",
            rows: Vec::new(),
        };
        let mut series = Series { name: format!("series_approx_kernel_{i}.csv"), points: vec![] };
        for row in &report.rows {
            table.rows.push(format!(
                "{},{},{},{},",
                row.n,
                fmt_f64(row.h2_error),
                fmt_f64(row.membership_residual),
                fmt_opt(row.decay_exponent),
            ));
            series.points.push((row.n as f64, row.h2_error));
        }
        out.manifest.push((format!("lambda_{i}"), format!("{},{}", lambda.re, lambda.im)));
        out.manifest
            .push((format!("kernel_norm_{i}"), fmt_f64(report.kernel_norm)));
        out.manifest.push((
            format!("kernel_decay_{i}"),
            fmt_opt(report.kernel_decay),
        ));
        out.manifest.push((
            format!("profile_integral_{i}"),
            fmt_f64(report.profile_integral),
        ));
        for row in &report.rows {
            out.manifest.push((
                format!("sup_h_{i}_n{}", row.n),
                fmt_f64(row.sup_h),
            ));
        }
        out.tables.push(table);
        out.series.push(series);
    }
    Ok(())
}

fn run_cyclicity(
    cfg: &ExperimentConfig,
    out: &mut RunOutput,
    radial: usize,
    angular: usize,
) -> Result<(), RunError> {
    let quad = DiscQuadrature::new(radial, angular)?;
    let mut table = Table {
        name: "cyclicity.csv".into(),
        header: "curve_degree,distance,condition,selfconv_delta",
        rows: Vec::new(),
    };
    for curve in &cfg.curves {
        let measure = curve.measure.build()?;
        let s = modelspace::inner_functions::SingularInner::with_tolerance(
            measure,
            cfg.tolerance,
        )?;
        let profile = cyclicity_profile(&s, &cfg.degrees, 2.0, &quad, curve.level)?;
        let mut series = Series {
            name: format!("series_cyclicity_{}.csv", curve.label),
            points: vec![],
        };
        for (deg, res) in cfg.degrees.iter().zip(&profile) {
            table.rows.push(format!(
                "{}_{deg},{},{},",
                curve.label,
                fmt_f64(res.distance),
                fmt_f64(res.condition_estimate),
            ));
            series.points.push((*deg as f64, res.distance));
            if res.regularized {
                out.warnings.push(format!(
                    "curve {} degree {deg}: Gram matrix required regularization",
                    curve.label
                ));
            }
        }
        out.series.push(series);
    }
    out.tables.push(table);
    Ok(())
}

fn run_pairing(
    cfg: &ExperimentConfig,
    out: &mut RunOutput,
    radial: usize,
    angular: usize,
) -> Result<(), RunError> {
    let quad = DiscQuadrature::new(radial, angular)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table {
        name: "pairing_check.csv".into(),
        header: "pair,gap,lhs_re,lhs_im,rhs_re,rhs_im,bound_ratio,selfconv_delta",
        rows: Vec::new(),
    };
    let mut max_gap = 0.0f64;
    // pair 0 is the closed-form case f = g = z with pairing exactly 1
    let z = DiscFunction::poly_real(&[0.0, 1.0]);
    let mut emit = |idx: usize,
                    f: &DiscFunction,
                    g: &DiscFunction,
                    table: &mut Table|
     -> Result<(), RunError> {
        let rep = cauchy_pairing_disc(f, g, &quad, cfg.pairing.p)?;
        max_gap = max_gap.max(rep.gap);
        table.rows.push(format!(
            "{idx},{},{},{},{},{},{},",
            fmt_f64(rep.gap),
            fmt_f64(rep.lhs.re),
            fmt_f64(rep.lhs.im),
            fmt_f64(rep.rhs.re),
            fmt_f64(rep.rhs.im),
            fmt_f64(rep.bound_ratio),
        ));
        Ok(())
    };
    emit(0, &z, &z, &mut table)?;
    for idx in 1..=cfg.pairing.pairs {
        let rand_poly = |rng: &mut ChaCha8Rng| {
            DiscFunction::poly(
                (0..=cfg.pairing.max_degree)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
        };
        let f = rand_poly(&mut rng);
        let g = rand_poly(&mut rng);
        emit(idx, &f, &g, &mut table)?;
    }
    out.tables.push(table);
    out.manifest.push(("max_gap".into(), fmt_f64(max_gap)));
    out.manifest.push(("pairing_p".into(), fmt_f64(cfg.pairing.p)));
    Ok(())
}

fn run_smoothing_suite(
    cfg: &ExperimentConfig,
    out: &mut RunOutput,
    grid_n: usize,
) -> Result<(), RunError> {
    let measure = cfg.measure.build()?;
    let set = measure_support_set(&measure)?;
    let profile = build_profile(set, cfg.profile.alpha, cfg.profile.c)?;
    let grid = CircleGrid::new(grid_n)?;
    if cfg.smoothing_ns.is_empty() {
        out.warnings.push("empty smoothing_ns: emitting header-only tables".into());
    }
    let mut table = Table {
        name: "smoothing_suite.csv".into(),
        header: "n,weight_mean,sup_modulus,median_deviation,negative_leak,selfconv_delta",
        rows: Vec::new(),
    };
    let mut series = Series { name: "series_smoothing_weight.csv".into(), points: vec![] };
    for &n in &cfg.smoothing_ns {
        let h = smoothing_function(&profile, n, grid)?;
        let (_, leak) = h.analytic_coefficients();
        table.rows.push(format!(
            "{n},{},{},{},{},",
            fmt_f64(h.weight_mean()),
            fmt_f64(h.sup_modulus()),
            fmt_f64(h.median_deviation()),
            fmt_f64(leak),
        ));
        series.points.push((n as f64, h.weight_mean()));
    }
    out.manifest.push(("profile_integral".into(), fmt_f64(profile.integral())));
    out.tables.push(table);
    out.series.push(series);
    Ok(())
}

/// Writes tables, series, and the manifest; returns the manifest path.
/// Timing goes to a separate file so result files stay byte-identical
/// across reruns.
pub fn emit_report(
    out_dir: &Path,
    cfg_echo: &str,
    output: &RunOutput,
    elapsed: std::time::Duration,
) -> Result<PathBuf, RunError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Io(out_dir.display().to_string(), e))?;
    let write = |name: &str, content: &str| -> Result<PathBuf, RunError> {
        let path = out_dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| RunError::Io(path.display().to_string(), e))?;
        Ok(path)
    };
    let mut paths = Vec::new();
    for t in &output.tables {
        paths.push(write(&t.name, &t.render())?);
    }
    for s in &output.series {
        let mut body = String::from("x,y\n");
        for &(x, y) in &s.points {
            let _ = writeln!(body, "{},{}", fmt_f64(x), fmt_f64(y));
        }
        paths.push(write(&s.name, &body)?);
    }
    let mut manifest = String::new();
    let mut entries = output.manifest.clone();
    for (i, w) in output.warnings.iter().enumerate() {
        entries.push((format!("warning_{i}"), w.clone()));
    }
    for p in &paths {
        entries.push((
            "result_file".into(),
            p.file_name().unwrap().to_string_lossy().into_owned(),
        ));
    }
    entries.push(("status".into(), "ok".into()));
    entries.sort();
    for (k, v) in &entries {
        let _ = writeln!(manifest, "{k} = {v}");
    }
    manifest.push_str("\n[config]\n");
    manifest.push_str(cfg_echo);
    let manifest_path = write("manifest.txt", &manifest)?;
    // excluded from byte-compare: wall time varies between runs
    write("timing.txt", &format!("elapsed_seconds = {:.3}\n", elapsed.as_secs_f64()))?;
    Ok(manifest_path)
}
