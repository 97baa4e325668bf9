//! `dunkl` — experiment runner for multivariate Bessel process simulation,
//! time-change analysis, collision-set dimension estimation, coupling checks,
//! and the cross-module verification suite.
//!
//! Exit codes: 0 ok, 2 invalid configuration, 3 validation/suite failure,
//! 4 runtime failure.

mod config;
mod svg;
mod verify;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use dunkl_core::algebra::AlgebraContext;
use dunkl_core::error::Error as CoreError;
use dunkl_core::fractal::{
    cantor_zero_set, default_fit_window, dyadic_scales, estimate_dim_from_zero_sets,
    extract_collision_times, fit_dimension, scalar_zero_set, box_counts, DimEstimate,
    EnsembleDimEstimate, ZeroSet,
};
use dunkl_core::pathio::{write_path_bin, write_path_csv};
use dunkl_core::root_system::min_wall_distance;
use dunkl_core::sde::{
    compute_time_change, couple_simple_root, simulate_besq_exact, simulate_ensemble,
};
use dunkl_core::stats::monotonicity_audit;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

struct Failure {
    code: u8,
    message: String,
}

type CmdResult = Result<(), Failure>;

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Failure {
        let code = match &e {
            CoreError::InvalidConfig(_)
            | CoreError::InvalidMultiplicity(_)
            | CoreError::SizeBelowMinimum { .. }
            | CoreError::DimensionMismatch { .. } => EXIT_CONFIG,
            CoreError::InvalidSystem(_) | CoreError::NonGenericChamberVector { .. } => {
                EXIT_VALIDATION
            }
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dunkl",
    version,
    about = "Simulate multivariate Bessel processes and estimate the dimension of their boundary-collision times"
)]
struct Cli {
    /// Key-value config file (.cfg)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any config key (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, global = true)]
    family: Option<String>,
    #[arg(long, global = true)]
    size: Option<usize>,
    /// Uniform multiplicity shorthand
    #[arg(long, global = true)]
    k: Option<f64>,
    /// Per-orbit multiplicities, comma separated (orbit-id order)
    #[arg(long, global = true)]
    multiplicities: Option<String>,
    /// Time horizon T
    #[arg(long, global = true, visible_alias = "T")]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    epsilon_coeff: Option<f64>,
    #[arg(long = "paths", global = true)]
    path_count: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long = "out", global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build and verify the configured root system; print its JSON document
    Roots,
    /// Simulate the path ensemble; write .bin paths and a summary
    Simulate {
        /// Also export path 0 as CSV
        #[arg(long)]
        csv: bool,
    },
    /// Per-path time change and monotonicity audit
    Timechange,
    /// Estimate the box-counting dimension of the collision-time set
    Dim {
        /// Calibration target instead of a simulation: interval | point |
        /// cantor3 | cantor4 | besq
        #[arg(long)]
        calibrate: Option<String>,
    },
    /// Shared-noise coupling of wall distances against 1-D Bessel bounds
    Couple {
        /// Simple-root index (default: all)
        #[arg(long)]
        simple: Option<usize>,
    },
    /// Run every module's invariant suite; nonzero exit on any failure
    Verify,
}

fn collect_overrides(cli: &Cli) -> Result<Vec<(String, String)>, Failure> {
    let mut over: Vec<(String, String)> = Vec::new();
    for s in &cli.sets {
        let (k, v) = s.split_once('=').ok_or_else(|| Failure {
            code: EXIT_CONFIG,
            message: format!("--set expects KEY=VALUE, got {s:?}"),
        })?;
        over.push((k.to_string(), v.to_string()));
    }
    let mut push = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            over.push((k.to_string(), v));
        }
    };
    push("family", cli.family.clone());
    push("size", cli.size.map(|v| v.to_string()));
    push("k", cli.k.map(|v| v.to_string()));
    push("multiplicities", cli.multiplicities.clone());
    push("T", cli.horizon.map(|v| v.to_string()));
    push("dt", cli.dt.map(|v| v.to_string()));
    push("epsilon_coeff", cli.epsilon_coeff.map(|v| v.to_string()));
    push("path_count", cli.path_count.map(|v| v.to_string()));
    push("seed", cli.seed.map(|v| v.to_string()));
    push("threads", cli.threads.map(|v| v.to_string()));
    if let Some(out) = &cli.out_dir {
        over.push(("out_dir".to_string(), out.display().to_string()));
    }
    Ok(over)
}

fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<(), Failure> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(CoreError::from)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(CoreError::from)?;
    Ok(())
}

fn ensure_out_dir(cfg: &ExperimentConfig) -> Result<(), Failure> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(CoreError::from)?;
    Ok(())
}

fn cmd_roots(cfg: &ExperimentConfig) -> CmdResult {
    let system = cfg.build_system()?;
    let doc = system.to_doc();
    let json = serde_json::to_string_pretty(&doc).map_err(CoreError::from)?;
    println!("{json}");
    Ok(())
}

#[derive(Serialize)]
struct PathSummary {
    path_index: u64,
    min_wall_distance: f64,
    hit_fraction: f64,
    substep_total: u64,
    wall_snap_count: u64,
}

#[derive(Serialize)]
struct SimulateSummary {
    config_hash: String,
    config: ExperimentConfig,
    epsilon: f64,
    paths: Vec<PathSummary>,
    fraction_points_within_epsilon: f64,
    fraction_paths_with_hits: f64,
    files: Vec<String>,
}

fn cmd_simulate(cfg: &ExperimentConfig, csv: bool) -> CmdResult {
    let sim = cfg.simulation()?;
    let records = simulate_ensemble(&sim)?;
    ensure_out_dir(cfg)?;
    let epsilon = cfg.epsilon_coeff * cfg.dt.sqrt();
    let mut paths = Vec::new();
    let mut files = Vec::new();
    let mut grid_hits = 0usize;
    let mut grid_total = 0usize;
    let mut paths_with_hits = 0usize;
    for rec in &records {
        let mut dmin = f64::INFINITY;
        let mut hits = 0usize;
        for i in 0..=rec.steps() {
            let d = min_wall_distance(rec.state(i), &sim.system)?;
            dmin = dmin.min(d);
            if d <= epsilon {
                hits += 1;
            }
        }
        grid_hits += hits;
        grid_total += rec.steps() + 1;
        if hits > 0 {
            paths_with_hits += 1;
        }
        paths.push(PathSummary {
            path_index: rec.path_index,
            min_wall_distance: dmin,
            hit_fraction: hits as f64 / (rec.steps() + 1) as f64,
            substep_total: rec.substep_total,
            wall_snap_count: rec.wall_snap_count,
        });
        let name = format!("path_{:03}.bin", rec.path_index);
        write_path_bin(rec, &cfg.out_dir.join(&name), cfg.hash())?;
        files.push(name);
    }
    if csv {
        write_path_csv(&records[0], &cfg.out_dir.join("path_000.csv"))?;
    }
    let summary = SimulateSummary {
        config_hash: format!("{:016x}", cfg.hash()),
        config: cfg.clone(),
        epsilon,
        paths,
        fraction_points_within_epsilon: grid_hits as f64 / grid_total as f64,
        fraction_paths_with_hits: paths_with_hits as f64 / records.len() as f64,
        files,
    };
    let out = cfg.out_dir.join("summary.json");
    write_json(&out, &summary)?;
    println!("wrote {} paths and {}", records.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct TimeChangeEntry {
    path_index: u64,
    total: f64,
    min_increment: f64,
    flat_count: usize,
    strict: bool,
}

#[derive(Serialize)]
struct TimeChangeReport {
    config_hash: String,
    per_path: Vec<TimeChangeEntry>,
    all_strict: bool,
}

fn cmd_timechange(cfg: &ExperimentConfig) -> CmdResult {
    let sim = cfg.simulation()?;
    let ctx = AlgebraContext::new(&sim.system, &sim.multiplicity)?;
    let records = simulate_ensemble(&sim)?;
    let mut per_path = Vec::new();
    for rec in &records {
        let tc = compute_time_change(rec, &ctx)?;
        let audit = monotonicity_audit(&tc);
        per_path.push(TimeChangeEntry {
            path_index: rec.path_index,
            total: tc.last(),
            min_increment: audit.min_increment,
            flat_count: audit.flat_count,
            strict: audit.strict,
        });
    }
    let report = TimeChangeReport {
        config_hash: format!("{:016x}", cfg.hash()),
        all_strict: per_path.iter().all(|e| e.strict),
        per_path,
    };
    ensure_out_dir(cfg)?;
    let out = cfg.out_dir.join("timechange.json");
    write_json(&out, &report)?;
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct DimReport {
    config_hash: String,
    mode: String,
    single: Option<DimEstimate>,
    ensemble: Option<EnsembleDimEstimate>,
}

fn fit_single(zs: &ZeroSet, scales: &[f64]) -> Result<DimEstimate, Failure> {
    let counts = box_counts(zs, scales)?;
    let window = default_fit_window(scales, zs.dt, zs.horizon);
    Ok(fit_dimension(&counts, scales, window)?)
}

/// Per-scale median of box counts over the nonempty paths, for plotting the
/// ensemble alongside its median slope.
fn median_counts(ensemble: &EnsembleDimEstimate) -> Vec<u64> {
    let n_scales = ensemble.scales.len();
    let mut out = Vec::with_capacity(n_scales);
    for j in 0..n_scales {
        let mut col: Vec<u64> = ensemble
            .per_path
            .iter()
            .flatten()
            .map(|e| e.counts[j])
            .collect();
        col.sort_unstable();
        out.push(col[col.len() / 2]);
    }
    out
}

fn cmd_dim(cfg: &ExperimentConfig, calibrate: Option<&str>) -> CmdResult {
    let report = match calibrate {
        None => {
            let sim = cfg.simulation()?;
            let records = simulate_ensemble(&sim)?;
            let scales = dyadic_scales(cfg.dt, cfg.horizon);
            let zero_sets: Result<Vec<ZeroSet>, CoreError> = records
                .iter()
                .map(|p| extract_collision_times(p, &sim.system, cfg.epsilon_coeff))
                .collect();
            let ensemble = estimate_dim_from_zero_sets(&zero_sets?, &scales)?;
            DimReport {
                config_hash: format!("{:016x}", cfg.hash()),
                mode: "simulation".into(),
                single: None,
                ensemble: Some(ensemble),
            }
        }
        Some("besq") => {
            // classical Bessel reference: BESQ(2k+1) from 0, zero set Y <= eps^2
            let delta = 2.0 * cfg.k + 1.0;
            let steps = (cfg.horizon / cfg.dt).round() as usize;
            let epsilon = cfg.epsilon_coeff * cfg.dt.sqrt();
            let zero_sets: Result<Vec<ZeroSet>, CoreError> = (0..cfg.path_count as u64)
                .map(|i| {
                    let p = simulate_besq_exact(delta, 0.0, steps, cfg.dt, cfg.seed, i)?;
                    Ok(scalar_zero_set(&p, epsilon))
                })
                .collect();
            let scales = dyadic_scales(cfg.dt, cfg.horizon);
            let ensemble = estimate_dim_from_zero_sets(&zero_sets?, &scales)?;
            DimReport {
                config_hash: format!("{:016x}", cfg.hash()),
                mode: "besq".into(),
                single: None,
                ensemble: Some(ensemble),
            }
        }
        Some(mode @ ("interval" | "point" | "cantor3" | "cantor4")) => {
            let (zs, scales) = match mode {
                "interval" => {
                    let dt: f64 = 1e-4;
                    let zs = ZeroSet {
                        hit_times: (0..=10_000).map(|i| i as f64 * dt).collect(),
                        epsilon: dt.sqrt(),
                        dt,
                        horizon: 1.0,
                    };
                    let scales = dyadic_scales(dt, 1.0);
                    (zs, scales)
                }
                "point" => {
                    let dt: f64 = 1e-4;
                    let zs = ZeroSet {
                        hit_times: vec![0.4441],
                        epsilon: dt.sqrt(),
                        dt,
                        horizon: 1.0,
                    };
                    let scales = dyadic_scales(dt, 1.0);
                    (zs, scales)
                }
                "cantor3" => {
                    let zs = cantor_zero_set(3, 12);
                    let scales: Vec<f64> = (1..=12).rev().map(|j| 3f64.powi(-j)).collect();
                    (zs, scales)
                }
                _ => {
                    let zs = cantor_zero_set(4, 10);
                    let scales: Vec<f64> = (1..=10).rev().map(|j| 4f64.powi(-j)).collect();
                    (zs, scales)
                }
            };
            DimReport {
                config_hash: format!("{:016x}", cfg.hash()),
                mode: mode.into(),
                single: Some(fit_single(&zs, &scales)?),
                ensemble: None,
            }
        }
        Some(other) => {
            return Err(Failure {
                code: EXIT_CONFIG,
                message: format!(
                    "unknown calibration target {other:?} (expected interval, point, cantor3, cantor4 or besq)"
                ),
            })
        }
    };
    ensure_out_dir(cfg)?;
    let json_out = cfg.out_dir.join("dim.json");
    write_json(&json_out, &report)?;
    let svg_out = cfg.out_dir.join("dim.svg");
    match (&report.single, &report.ensemble) {
        (Some(est), _) => {
            svg::write_loglog_plot(
                &svg_out,
                &format!("box counts ({})", report.mode),
                &est.scales,
                &est.counts,
                est.slope,
                est.fit_window,
            )?;
            println!(
                "slope = {:.4} +- {:.4}; wrote {} and {}",
                est.slope,
                est.stderr,
                json_out.display(),
                svg_out.display()
            );
        }
        (None, Some(ens)) => {
            let counts = median_counts(ens);
            let window = default_fit_window(&ens.scales, cfg.dt, cfg.horizon);
            svg::write_loglog_plot(
                &svg_out,
                &format!("box counts, per-scale median ({})", report.mode),
                &ens.scales,
                &counts,
                ens.median_slope,
                window,
            )?;
            println!(
                "median slope = {:.4} (IQR {:.4}, empty fraction {:.3}); wrote {} and {}",
                ens.median_slope,
                ens.iqr,
                ens.empty_fraction,
                json_out.display(),
                svg_out.display()
            );
        }
        _ => unreachable!(),
    }
    Ok(())
}

#[derive(Serialize)]
struct CoupleEntry {
    simple_index: usize,
    path_index: u64,
    max_gap: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct CoupleReport {
    config_hash: String,
    entries: Vec<CoupleEntry>,
    all_pass: bool,
}

fn cmd_couple(cfg: &ExperimentConfig, simple: Option<usize>) -> CmdResult {
    let sim = cfg.simulation()?;
    let simple_range: Vec<usize> = match simple {
        Some(i) => vec![i],
        None => (0..sim.system.rank()).collect(),
    };
    let mut entries = Vec::new();
    for &si in &simple_range {
        for path in 0..sim.path_count as u64 {
            let (y, z) = couple_simple_root(&sim, si, path)?;
            let zmax = z.values().iter().cloned().fold(0.0f64, f64::max);
            let tolerance = 1e-3 * zmax.max(1.0);
            let max_gap = y
                .values()
                .iter()
                .zip(z.values())
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max);
            entries.push(CoupleEntry {
                simple_index: si,
                path_index: path,
                max_gap,
                tolerance,
                pass: max_gap <= tolerance,
            });
        }
    }
    let all_pass = entries.iter().all(|e| e.pass);
    let report = CoupleReport {
        config_hash: format!("{:016x}", cfg.hash()),
        entries,
        all_pass,
    };
    ensure_out_dir(cfg)?;
    let out = cfg.out_dir.join("couple.json");
    write_json(&out, &report)?;
    println!("wrote {}", out.display());
    if !all_pass {
        return Err(Failure {
            code: EXIT_VALIDATION,
            message: "coupling bound violated; see couple.json".into(),
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReportDoc {
    config_hash: String,
    checks: Vec<verify::CheckResult>,
    all_pass: bool,
}

fn cmd_verify(cfg: &ExperimentConfig) -> CmdResult {
    // a broken experiment config must surface before any suite runs
    cfg.simulation()?;
    let checks = verify::run_suite(cfg.seed)?;
    let all_pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        println!(
            "[{}] {}::{} — {} (tolerance {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.module,
            c.name,
            c.observed,
            c.tolerance
        );
    }
    let report = VerifyReportDoc {
        config_hash: format!("{:016x}", cfg.hash()),
        checks,
        all_pass,
    };
    ensure_out_dir(cfg)?;
    let out = cfg.out_dir.join("verify.json");
    write_json(&out, &report)?;
    println!("wrote {}", out.display());
    if !all_pass {
        return Err(Failure {
            code: EXIT_VALIDATION,
            message: "verification suite failed".into(),
        });
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let overrides = collect_overrides(cli)?;
    let cfg = ExperimentConfig::resolve(cli.config.as_deref(), &overrides)?;
    let threads = cfg.effective_threads();
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    match &cli.cmd {
        Cmd::Roots => cmd_roots(&cfg),
        Cmd::Simulate { csv } => cmd_simulate(&cfg, *csv),
        Cmd::Timechange => cmd_timechange(&cfg),
        Cmd::Dim { calibrate } => cmd_dim(&cfg, calibrate.as_deref()),
        Cmd::Couple { simple } => cmd_couple(&cfg, *simple),
        Cmd::Verify => cmd_verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
