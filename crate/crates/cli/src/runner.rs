//! Command implementations: single runs, parallel sweeps, and model
//! diagnostics.
//!
//! A run writes, inside its output directory:
//!
//! * `trace.csv` — one row per iteration: shift change and all structural
//!   defects (timing is reported in `summary.csv` only, so every trace
//!   column is bitwise deterministic);
//! * `hsv.csv` — Hankel singular values of the full-order model;
//! * `gramian_spectra.csv` — controllability/observability eigenvalues;
//! * `summary.csv` — the one-row run report (dimensions, loop wall time,
//!   convergence, H2 errors, final defects, machine-readable error code);
//! * `reduced_model/{a,b,c,d}.mat` — the reduced realization.
//!
//! Wall time covers only the reduction loop (pool solves through
//! projection), not benchmark construction or Gramian analysis.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use qirka_core::analysis::{gramians, h2_error, hankel_singular_values};
use qirka_core::benchmarks::{build_bkc, build_bus, build_chain, BkcConfig, ChainConfig};
use qirka_core::{matio, run_with_monitor, CanonicalStructure, ProjectionPair, StateSpaceModel};

use crate::config::{load_config, BenchmarkSpec, RunConfig};

/// The structural-defect gate for a successful exit.
const DEFECT_TOL: f64 = 1e-10;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_else(|| "nan".to_string())
}

/// Full-order model plus reporting metadata for one run.
struct PreparedRun {
    /// Model whose transfer is reduced.
    target: StateSpaceModel,
    /// Realizable dilation used for defect monitoring, when the target
    /// itself is not realizable.
    monitor: Option<StateSpaceModel>,
    n: usize,
    m: usize,
}

fn prepare(spec: &BenchmarkSpec) -> Result<PreparedRun> {
    match spec {
        BenchmarkSpec::Chain { variant, n, m } => {
            let config = match variant {
                qirka_core::benchmarks::ChainVariant::Homogeneous => {
                    ChainConfig::homogeneous(*n, *m)
                }
                qirka_core::benchmarks::ChainVariant::Heterogeneous => {
                    ChainConfig::heterogeneous(*n, *m)
                }
            };
            let models = build_chain(&config).context("chain benchmark rejected")?;
            Ok(PreparedRun {
                target: models.external,
                monitor: Some(models.full_port),
                n: *n,
                m: *m,
            })
        }
        BenchmarkSpec::Bkc { variant, n, m } => {
            let config = match variant {
                qirka_core::benchmarks::ChainVariant::Homogeneous => {
                    BkcConfig::homogeneous(*n, *m)
                }
                qirka_core::benchmarks::ChainVariant::Heterogeneous => {
                    BkcConfig::heterogeneous(*n, *m)
                }
            };
            let models = build_bkc(&config).context("bkc benchmark rejected")?;
            Ok(PreparedRun {
                target: models.external,
                monitor: Some(models.full_port),
                n: *n,
                m: *m,
            })
        }
        BenchmarkSpec::Bus => {
            let model =
                build_bus(&qirka_core::benchmarks::BusConfig::default()).context("bus rejected")?;
            Ok(PreparedRun {
                n: model.mode_count(),
                m: model.channel_count(),
                target: model,
                monitor: None,
            })
        }
        BenchmarkSpec::File { model_dir } => {
            let model = read_model(model_dir)?;
            Ok(PreparedRun {
                n: model.mode_count(),
                m: model.channel_count(),
                target: model,
                monitor: None,
            })
        }
    }
}

/// Reads `a.mat`, `b.mat`, `c.mat`, `d.mat` from a directory.
pub fn read_model(dir: &Path) -> Result<StateSpaceModel> {
    let load = |name: &str| {
        matio::read_matrix(&dir.join(name))
            .with_context(|| format!("reading {}", dir.join(name).display()))
    };
    let model = StateSpaceModel::new(load("a.mat")?, load("b.mat")?, load("c.mat")?, load("d.mat")?)
        .context("model files do not form a valid realization")?;
    Ok(model)
}

/// One-row run report, mirroring the summary/sweep table semantics.
pub struct RunReport {
    pub benchmark: String,
    pub variant: String,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    /// Reduction-loop wall time (sum over iterations).
    pub wall_seconds: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub h2_absolute: Option<f64>,
    pub h2_relative: Option<f64>,
    /// Final `[Δ_symp, Δ_left, Δ_PR,1, Δ_PR,2]` of the selected iterate.
    pub defects: Option<[f64; 4]>,
    pub error_code: Option<String>,
}

impl RunReport {
    fn new(config: &RunConfig, n: usize, m: usize) -> Self {
        Self {
            benchmark: config.benchmark.kind_label().to_string(),
            variant: config.benchmark.variant_label().to_string(),
            n,
            m,
            r: config.qirka.r,
            wall_seconds: None,
            iterations: 0,
            converged: false,
            h2_absolute: None,
            h2_relative: None,
            defects: None,
            error_code: None,
        }
    }

    /// Success gate: converged, every structural defect within tolerance,
    /// and no recorded error.
    pub fn ok(&self) -> bool {
        self.error_code.is_none()
            && self.converged
            && self
                .defects
                .map(|d| d.iter().all(|v| *v <= DEFECT_TOL))
                .unwrap_or(false)
    }
}

const SUMMARY_HEADER: &str = "benchmark,variant,n,m,r,wall_seconds,iterations,converged,\
     h2_error_absolute,h2_error_relative,defect_symplectic,defect_biorthogonality,\
     defect_pr_r1,defect_pr_r2,error_code";

fn summary_row(report: &RunReport) -> String {
    let d = |i: usize| fmt_opt(report.defects.map(|d| d[i]));
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        report.benchmark,
        report.variant,
        report.n,
        report.m,
        report.r,
        fmt_opt(report.wall_seconds),
        report.iterations,
        report.converged,
        fmt_opt(report.h2_absolute),
        fmt_opt(report.h2_relative),
        d(0),
        d(1),
        d(2),
        d(3),
        report.error_code.as_deref().unwrap_or("")
    )
}

fn write_summary(out: &Path, report: &RunReport) -> Result<()> {
    let path = out.join("summary.csv");
    std::fs::write(&path, format!("{SUMMARY_HEADER}\n{}\n", summary_row(report)))
        .with_context(|| format!("writing {}", path.display()))
}

fn write_trace(out: &Path, trace: &qirka_core::IterationTrace) -> Result<()> {
    let mut text = String::from(
        "iteration,relative_change,symplectic_defect,biorthogonality_defect,\
         pr_defect_r1,pr_defect_r2,pr_defect_r3\n",
    );
    for (idx, record) in trace.records.iter().enumerate() {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            idx,
            fmt(record.relative_change),
            fmt(record.symplectic_defect),
            fmt(record.biorthogonality_defect),
            fmt(record.pr_defects[0]),
            fmt(record.pr_defects[1]),
            fmt(record.pr_defects[2]),
        ));
    }
    let path = out.join("trace.csv");
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_spectra(out: &Path, model: &StateSpaceModel) -> Result<Option<&'static str>> {
    let pair = match gramians(model) {
        Ok(pair) => pair,
        Err(e) => return Ok(Some(e.code())),
    };
    let sigma = match hankel_singular_values(&pair) {
        Ok(sigma) => sigma,
        Err(e) => return Ok(Some(e.code())),
    };

    let mut text = String::from("index,hankel_singular_value\n");
    for (idx, s) in sigma.iter().enumerate() {
        text.push_str(&format!("{},{}\n", idx, fmt(*s)));
    }
    let path = out.join("hsv.csv");
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;

    let sorted_desc = |m: &nalgebra::DMatrix<f64>| {
        let mut eigs: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        eigs.sort_by(|a, b| b.total_cmp(a));
        eigs
    };
    let wc = sorted_desc(&pair.controllability);
    let wo = sorted_desc(&pair.observability);
    let mut text = String::from("index,controllability_eigenvalue,observability_eigenvalue\n");
    for (idx, (c, o)) in wc.iter().zip(&wo).enumerate() {
        text.push_str(&format!("{},{},{}\n", idx, fmt(*c), fmt(*o)));
    }
    let path = out.join("gramian_spectra.csv");
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(None)
}

fn write_reduced_model(out: &Path, model: &StateSpaceModel) -> Result<()> {
    let dir = out.join("reduced_model");
    std::fs::create_dir_all(&dir)?;
    matio::write_matrix(&dir.join("a.mat"), model.a())?;
    matio::write_matrix(&dir.join("b.mat"), model.b())?;
    matio::write_matrix(&dir.join("c.mat"), model.c())?;
    matio::write_matrix(&dir.join("d.mat"), model.d())?;
    Ok(())
}

/// Executes one prepared run, writing all artifacts into `out`.  Engine and
/// analysis failures are reported through the summary's error code; hard
/// I/O failures bubble up.
fn execute(prepared: &PreparedRun, config: &RunConfig, out: &Path) -> Result<RunReport> {
    let mut report = RunReport::new(config, prepared.n, prepared.m);

    if let Some(code) = write_spectra(out, &prepared.target)? {
        report.error_code = Some(code.to_string());
        return Ok(report);
    }

    let outcome = match run_with_monitor(&prepared.target, prepared.monitor.as_ref(), &config.qirka)
    {
        Ok(outcome) => outcome,
        Err(e) => {
            report.error_code = Some(e.code().to_string());
            return Ok(report);
        }
    };

    write_trace(out, &outcome.trace)?;
    write_reduced_model(out, &outcome.reduced)?;

    let selected = &outcome.trace.records[outcome.trace.selected];
    report.iterations = outcome.trace.records.len();
    report.converged = outcome.trace.converged;
    report.wall_seconds = Some(
        outcome
            .trace
            .records
            .iter()
            .map(|r| r.elapsed_seconds)
            .sum(),
    );
    report.defects = Some([
        selected.symplectic_defect,
        selected.biorthogonality_defect,
        selected.pr_defects[0],
        selected.pr_defects[1],
    ]);

    match h2_error(&prepared.target, &outcome.reduced) {
        Ok(err) => {
            report.h2_absolute = Some(err.absolute);
            report.h2_relative = Some(err.relative);
        }
        Err(e) => report.error_code = Some(e.code().to_string()),
    }
    Ok(report)
}

/// Loads, prepares, executes and summarizes one run.  Configuration and
/// benchmark validation failures return `Err` before any file is written;
/// later failures still produce `summary.csv` with an error code.
pub fn run_to_report(config: &RunConfig, out: &Path) -> Result<RunReport> {
    let prepared = prepare(&config.benchmark)?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let report = execute(&prepared, config, out)?;
    write_summary(out, &report)?;
    Ok(report)
}

/// `run` subcommand.  Returns the success flag for the process exit code.
pub fn cmd_run(config_path: &Path, out_override: Option<&Path>) -> Result<bool> {
    let config = load_config(config_path)?;
    let out = out_override
        .map(Path::to_path_buf)
        .or_else(|| config.out_dir.clone())
        .ok_or_else(|| {
            anyhow::anyhow!("no output directory: set [output] dir in the config or pass --out")
        })?;
    let report = run_to_report(&config, &out)?;
    println!(
        "[run] {}/{} n={} m={} r={}: converged={} iterations={} relative_h2_error={} -> {}",
        report.benchmark,
        report.variant,
        report.n,
        report.m,
        report.r,
        report.converged,
        report.iterations,
        fmt_opt(report.h2_relative),
        out.display()
    );
    if let Some(code) = &report.error_code {
        eprintln!("[run] failed with error code `{code}` (see summary.csv)");
    }
    Ok(report.ok())
}

struct SweepRow {
    label: String,
    report: Option<RunReport>,
    /// Set when the configuration could not even be loaded or prepared.
    error_code: Option<String>,
}

fn sweep_entry(index: usize, config_path: &Path, out_root: &Path) -> SweepRow {
    let label = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("run_{index}"));
    let attempt = load_config(config_path).and_then(|config| {
        let out = out_root.join(format!("run_{index:03}_{}", config.label));
        run_to_report(&config, &out)
    });
    match attempt {
        Ok(report) => SweepRow {
            label,
            report: Some(report),
            error_code: None,
        },
        Err(err) => {
            eprintln!("[sweep] {}: {err:#}", config_path.display());
            let code = err
                .downcast_ref::<qirka_core::Error>()
                .map(|e| e.code())
                .unwrap_or("invalid-config");
            SweepRow {
                label,
                report: None,
                error_code: Some(code.to_string()),
            }
        }
    }
}

/// `sweep` subcommand: runs every configuration (optionally in parallel),
/// writes per-run artifacts under `out_root/run_<idx>_<label>/` and the
/// aggregate `sweep.csv` with rows in input order.
pub fn cmd_sweep(config_paths: &[PathBuf], out_root: &Path, workers: Option<usize>) -> Result<bool> {
    if config_paths.is_empty() {
        bail!("sweep needs at least one --config");
    }
    std::fs::create_dir_all(out_root)
        .with_context(|| format!("creating output directory {}", out_root.display()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    let rows: Vec<SweepRow> = pool.install(|| {
        config_paths
            .par_iter()
            .enumerate()
            .map(|(index, path)| sweep_entry(index, path, out_root))
            .collect()
    });

    let mut text = String::from(
        "index,config,benchmark,variant,n,m,r,wall_seconds,iterations,converged,\
         h2_error_relative,error_code\n",
    );
    let mut all_ok = true;
    for (index, row) in rows.iter().enumerate() {
        match &row.report {
            Some(report) => {
                all_ok &= report.ok();
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    index,
                    row.label,
                    report.benchmark,
                    report.variant,
                    report.n,
                    report.m,
                    report.r,
                    fmt_opt(report.wall_seconds),
                    report.iterations,
                    report.converged,
                    fmt_opt(report.h2_relative),
                    report.error_code.as_deref().unwrap_or("")
                ));
            }
            None => {
                all_ok = false;
                text.push_str(&format!(
                    "{},{},,,,,,,,,,{}\n",
                    index,
                    row.label,
                    row.error_code.as_deref().unwrap_or("invalid-config")
                ));
            }
        }
    }
    let path = out_root.join("sweep.csv");
    std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "[sweep] {} runs -> {} (all_ok={})",
        rows.len(),
        path.display(),
        all_ok
    );
    Ok(all_ok)
}

/// `diagnose` subcommand: prints realizability residuals of a stored model
/// and, given a trial basis, its structural defects.
pub fn cmd_diagnose(model_dir: &Path, basis: Option<&Path>) -> Result<bool> {
    let model = read_model(model_dir)?;
    let res = model.pr_residuals();
    println!("state_dimension          = {}", model.state_dim());
    println!("port_dimension           = {}", model.port_dim());
    println!("pr_residual_r1           = {}", fmt(res.r1_norm));
    println!("pr_residual_r2           = {}", fmt(res.r2_norm));
    println!("pr_residual_r3           = {}", fmt(res.r3_norm));
    println!("pr_residual_max          = {}", fmt(res.max_norm()));
    match model.stability_margin() {
        Ok(margin) => println!("stability_margin         = {}", fmt(margin)),
        Err(e) => println!("stability_margin         = unavailable ({e})"),
    }

    if let Some(basis_path) = basis {
        let v = matio::read_matrix(basis_path)
            .with_context(|| format!("reading {}", basis_path.display()))?;
        let jn = CanonicalStructure::new(model.mode_count())?;
        match ProjectionPair::from_trial_basis(v, &jn) {
            Ok(pair) => {
                println!("basis_symplectic_defect  = {}", fmt(pair.symplectic_defect()));
                println!(
                    "basis_biorthogonality    = {}",
                    fmt(pair.biorthogonality_defect())
                );
                println!("basis_identity_defect    = {}", fmt(pair.identity_defect()));
            }
            Err(qirka_core::Error::NonSymplecticBasis { defect }) => {
                println!("basis_symplectic_defect  = {}", fmt(defect));
                println!("basis rejected: not symplectic within tolerance");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}
