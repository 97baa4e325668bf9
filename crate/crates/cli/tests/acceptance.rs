//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them all).

use dunkl_core::algebra::{AlgebraContext, MultiplicityFunction};
use dunkl_core::fractal::{
    box_counts, cantor_zero_set, default_fit_window, dyadic_scales, estimate_dim_from_zero_sets,
    extract_collision_times, fit_dimension, scalar_zero_set, ZeroSet,
};
use dunkl_core::linalg::norm;
use dunkl_core::root_system::{
    build_root_system, chamber_project, default_interior_point, min_wall_distance, Family,
    RootSystem,
};
use dunkl_core::rng::{mix, standard_normal};
use dunkl_core::sde::{
    compute_time_change, couple_simple_root, simulate_besq_exact, simulate_radial_dunkl,
    time_changed_v, SimulationConfig,
};
use dunkl_core::stats::{ks_two_sample, monotonicity_audit, quadratic_variation_ratio};
use rayon::prelude::*;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {n:02} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn survey() -> Vec<RootSystem> {
    let mut out = Vec::new();
    for n in 2..=6 {
        out.push(build_root_system(Family::A, n, None).unwrap());
    }
    for n in 2..=4 {
        out.push(build_root_system(Family::B, n, None).unwrap());
    }
    out.push(build_root_system(Family::C, 3, None).unwrap());
    out.push(build_root_system(Family::D, 4, None).unwrap());
    for m in 3..=8 {
        out.push(build_root_system(Family::I2, m, None).unwrap());
    }
    out
}

fn interior_points(system: &RootSystem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let base = default_interior_point(system).unwrap();
    let mut out = Vec::with_capacity(count);
    let mut draw = 0u64;
    while out.len() < count {
        let mut x = base.clone();
        for (c, v) in x.iter_mut().enumerate() {
            *v += 0.4 * standard_normal(mix(&[seed, draw, c as u64]));
        }
        draw += 1;
        let p = chamber_project(&x, system).unwrap();
        if min_wall_distance(&p, system).unwrap() > 0.05 {
            out.push(p);
        }
    }
    out
}

fn multiplicities_for(system: &RootSystem) -> Vec<MultiplicityFunction> {
    let mut out = vec![MultiplicityFunction::uniform(0.35, system).unwrap()];
    if system.orbit_count() == 2 {
        out.push(MultiplicityFunction::new(vec![0.2, 0.45], system).unwrap());
    }
    out
}

#[test]
fn criterion_01_cross_term_cancellation() {
    let mut worst = 0.0f64;
    for system in survey() {
        for mult in multiplicities_for(&system) {
            let ctx = AlgebraContext::new(&system, &mult).unwrap();
            let rels: Vec<f64> = interior_points(&system, 1000, 111)
                .par_iter()
                .map(|x| {
                    let p = ctx.cross_term_probe(x).unwrap();
                    p.residual / p.largest_term.max(1e-300)
                })
                .collect();
            worst = worst.max(rels.into_iter().fold(0.0, f64::max));
        }
    }
    report(
        1,
        "cross_term_residual",
        worst < 1e-8,
        &format!("max relative residual {worst:.3e} over 1000 interior points per system"),
    );
}

#[test]
fn criterion_02_derivative_suite() {
    let mut worst_grad = 0.0f64;
    let mut worst_lap = 0.0f64;
    for system in survey() {
        let mult = MultiplicityFunction::uniform(0.3, &system).unwrap();
        let ctx = AlgebraContext::new(&system, &mult).unwrap();
        for x in interior_points(&system, 100, 222) {
            let g = ctx.grad_alt_poly_sq(&x).unwrap();
            let gscale = norm(&g).max(1e-12);
            let h = 1e-5 * (1.0 + norm(&x));
            let hl = 1e-2 * (1.0 + norm(&x));
            let f0 = ctx.alt_poly_sq(&x);
            let mut lap = 0.0;
            for i in 0..x.len() {
                let f = |delta: f64| {
                    let mut y = x.clone();
                    y[i] += delta;
                    ctx.alt_poly_sq(&y)
                };
                let fd = (f(h) - f(-h)) / (2.0 * h);
                worst_grad = worst_grad.max((g[i] - fd).abs() / gscale);
                let c1 = (f(hl) - 2.0 * f0 + f(-hl)) / (hl * hl);
                let c2 = (f(hl / 2.0) - 2.0 * f0 + f(-hl / 2.0)) / (hl * hl / 4.0);
                let c3 = (f(hl / 4.0) - 2.0 * f0 + f(-hl / 4.0)) / (hl * hl / 16.0);
                let r1 = (4.0 * c2 - c1) / 3.0;
                let r2 = (4.0 * c3 - c2) / 3.0;
                lap += (16.0 * r2 - r1) / 15.0;
            }
            let target = 2.0 * ctx.time_change_density(&x);
            worst_lap = worst_lap.max((lap - target).abs() / target.abs().max(1e-12));
        }
    }
    report(
        2,
        "derivative_suite",
        worst_grad < 1e-6 && worst_lap < 1e-8,
        &format!("gradient rel err {worst_grad:.3e} (< 1e-6), laplacian rel err {worst_lap:.3e} (< 1e-8)"),
    );
}

#[test]
fn criterion_03_estimator_calibration() {
    let dt = 1e-4;
    let fit = |zs: &ZeroSet, scales: &[f64]| {
        let counts = box_counts(zs, scales).unwrap();
        let w = default_fit_window(scales, zs.dt, zs.horizon);
        fit_dimension(&counts, scales, w).unwrap().slope
    };
    let interval = ZeroSet {
        hit_times: (0..=10_000).map(|i| i as f64 * dt).collect(),
        epsilon: dt.sqrt(),
        dt,
        horizon: 1.0,
    };
    let point = ZeroSet {
        hit_times: vec![0.4441],
        ..interval.clone()
    };
    let scales = dyadic_scales(dt, 1.0);
    let s_interval = fit(&interval, &scales);
    let s_point = fit(&point, &scales);
    let c3_scales: Vec<f64> = (1..=12).rev().map(|j| 3f64.powi(-j)).collect();
    let s_c3 = fit(&cantor_zero_set(3, 12), &c3_scales);
    let c4_scales: Vec<f64> = (1..=10).rev().map(|j| 4f64.powi(-j)).collect();
    let s_c4 = fit(&cantor_zero_set(4, 10), &c4_scales);
    let c3_target = 2f64.ln() / 3f64.ln();
    let pass = (s_interval - 1.0).abs() <= 0.01
        && s_point.abs() <= 0.02
        && (s_c3 - c3_target).abs() <= 0.02
        && (s_c4 - 0.5).abs() <= 0.02;
    report(
        3,
        "estimator_calibration",
        pass,
        &format!(
            "interval {s_interval:.4}, point {s_point:.4}, cantor3 {s_c3:.4} (target {c3_target:.4}), cantor4 {s_c4:.4}"
        ),
    );
}

#[test]
fn criterion_04_classical_bessel_dimension_oracle() {
    let (dt, horizon, paths, seed) = (1e-6f64, 1.0f64, 32u64, 2002u64);
    let steps = (horizon / dt).round() as usize;
    let epsilon = dt.sqrt();
    let scales = dyadic_scales(dt, horizon);
    let mut detail = String::new();
    let mut pass = true;
    for k in [0.1, 0.25, 0.4] {
        let delta = 2.0 * k + 1.0;
        let zero_sets: Vec<ZeroSet> = (0..paths)
            .into_par_iter()
            .map(|i| {
                let p = simulate_besq_exact(delta, 0.0, steps, dt, seed, i).unwrap();
                scalar_zero_set(&p, epsilon)
            })
            .collect();
        let est = estimate_dim_from_zero_sets(&zero_sets, &scales).unwrap();
        let target = 0.5 - k;
        let ok = (est.median_slope - target).abs() <= 0.08;
        pass &= ok;
        detail.push_str(&format!(
            "k={k}: median {:.4} vs {target} (IQR {:.3}); ",
            est.median_slope, est.iqr
        ));
    }
    report(4, "classical_bessel_dimension", pass, detail.trim_end());
}

fn chamber_dimension_run(
    system: RootSystem,
    mult: MultiplicityFunction,
    x0: Vec<f64>,
    dt: f64,
    paths: usize,
    seed: u64,
) -> dunkl_core::fractal::EnsembleDimEstimate {
    let mut cfg = SimulationConfig::new(system, mult).unwrap();
    cfg.x0 = x0;
    cfg.dt = dt;
    cfg.horizon = 1.0;
    cfg.seed = seed;
    cfg.path_count = paths;
    cfg.validate().unwrap();
    let zero_sets: Vec<ZeroSet> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let p = simulate_radial_dunkl(&cfg, i).unwrap();
            extract_collision_times(&p, &cfg.system, 1.0).unwrap()
        })
        .collect();
    let scales = dyadic_scales(dt, cfg.horizon);
    estimate_dim_from_zero_sets(&zero_sets, &scales).unwrap()
}

#[test]
fn criterion_05_main_theorem_uniform_a2() {
    let system = build_root_system(Family::A, 3, None).unwrap();
    let mult = MultiplicityFunction::uniform(0.25, &system).unwrap();
    // start one wall-distance 0.05 from the first simple wall, 0.5 from the other
    let x0 = vec![-0.2828427, -0.2121320, 0.4949747];
    let est = chamber_dimension_run(system, mult, x0, 1e-5, 32, 2002);
    let pass = (est.median_slope - 0.25).abs() <= 0.10 && est.empty_fraction < 0.20;
    report(
        5,
        "main_theorem_uniform_a2",
        pass,
        &format!(
            "median {:.4} vs 0.25 (IQR {:.3}), empty fraction {:.3}",
            est.median_slope, est.iqr, est.empty_fraction
        ),
    );
}

#[test]
fn criterion_06_main_theorem_nonuniform_b2() {
    let system = build_root_system(Family::B, 2, None).unwrap();
    // orbit 0 = short roots (k = 0.2), orbit 1 = long roots (k = 0.45)
    let mult = MultiplicityFunction::new(vec![0.2, 0.45], &system).unwrap();
    // start near the short-root wall carrying min k
    let x0 = vec![0.05, 0.7571068];
    let est = chamber_dimension_run(system, mult, x0, 1e-5, 32, 2002);
    let pass = (est.median_slope - 0.30).abs() <= 0.10;
    report(
        6,
        "main_theorem_nonuniform_b2",
        pass,
        &format!(
            "median {:.4} vs 0.30 = 1/2 - min k (IQR {:.3}), empty fraction {:.3}",
            est.median_slope, est.iqr, est.empty_fraction
        ),
    );
}

#[test]
fn criterion_07_no_collision_regime() {
    let system = build_root_system(Family::A, 3, None).unwrap();
    let mult = MultiplicityFunction::uniform(0.75, &system).unwrap();
    let mut cfg = SimulationConfig::new(system, mult).unwrap();
    cfg.dt = 1e-5;
    cfg.horizon = 1.0;
    cfg.seed = 2002;
    cfg.path_count = 32;
    let epsilon = cfg.dt.sqrt();
    let results: Vec<(usize, usize)> = (0..cfg.path_count as u64)
        .into_par_iter()
        .map(|i| {
            let p = simulate_radial_dunkl(&cfg, i).unwrap();
            let hits = (0..=p.steps())
                .filter(|&j| min_wall_distance(p.state(j), &cfg.system).unwrap() <= epsilon)
                .count();
            (hits, p.steps() + 1)
        })
        .collect();
    let total_hits: usize = results.iter().map(|r| r.0).sum();
    let total_points: usize = results.iter().map(|r| r.1).sum();
    let empty_paths = results.iter().filter(|r| r.0 == 0).count();
    let hit_fraction = total_hits as f64 / total_points as f64;
    let empty_fraction = empty_paths as f64 / results.len() as f64;
    report(
        7,
        "no_collision_k_0_75",
        hit_fraction < 0.001 && empty_fraction > 0.99,
        &format!("grid-point hit fraction {hit_fraction:.5}, empty-path fraction {empty_fraction:.3}"),
    );
}

#[test]
fn criterion_08_time_change_law() {
    let system = build_root_system(Family::A, 3, None).unwrap();
    let mult = MultiplicityFunction::uniform(0.3, &system).unwrap();
    let mut cfg = SimulationConfig::new(system, mult).unwrap();
    cfg.dt = 1e-4;
    cfg.horizon = 0.2;
    cfg.path_count = 256;
    let ctx = AlgebraContext::new(&cfg.system, &cfg.multiplicity).unwrap();
    let y0 = ctx.alt_poly_sq(&cfg.x0);
    let tau = 0.5;
    let seeds = [8101u64, 8102, 8103, 8104, 8105];
    let mut ks_passes = 0;
    let mut details = String::new();
    let mut qv_ratio = f64::NAN;
    for (si, &seed) in seeds.iter().enumerate() {
        cfg.seed = seed;
        let samples: Vec<f64> = (0..cfg.path_count as u64)
            .into_par_iter()
            .map(|i| {
                let p = simulate_radial_dunkl(&cfg, i).unwrap();
                let tc = compute_time_change(&p, &ctx).unwrap();
                time_changed_v(&p, &ctx, &tc, &[tau]).unwrap()[0]
            })
            .collect();
        let besq: Vec<f64> = (0..cfg.path_count as u64)
            .map(|i| {
                simulate_besq_exact(1.6, y0, 1, tau, mix(&[seed, 0xBE5]), i)
                    .unwrap()
                    .values()[1]
            })
            .collect();
        let ks = ks_two_sample(&samples, &besq).unwrap();
        if ks.pass {
            ks_passes += 1;
        }
        details.push_str(&format!("seed {seed}: D={:.4}; ", ks.statistic));
        if si == 0 {
            // quadratic variation of V along the clock, on the native grid
            let p = simulate_radial_dunkl(&cfg, 0).unwrap();
            let tc = compute_time_change(&p, &ctx).unwrap();
            let values: Vec<f64> = (0..=p.steps()).map(|i| ctx.alt_poly_sq(p.state(i))).collect();
            qv_ratio = quadratic_variation_ratio(&values, tc.values()).unwrap();
        }
    }
    let pass = ks_passes >= 4 && (0.85..=1.15).contains(&qv_ratio);
    report(
        8,
        "time_change_law",
        pass,
        &format!("KS passes {ks_passes}/5 [{}], QV ratio {qv_ratio:.4}", details.trim_end()),
    );
}

#[test]
fn criterion_09_coupling_bound() {
    let mut pass = true;
    let mut detail = String::new();
    let cases: Vec<(RootSystem, MultiplicityFunction, &str)> = {
        let b2 = build_root_system(Family::B, 2, None).unwrap();
        let b2m = MultiplicityFunction::new(vec![0.2, 0.45], &b2).unwrap();
        let a3 = build_root_system(Family::A, 4, None).unwrap();
        let a3m = MultiplicityFunction::uniform(0.3, &a3).unwrap();
        let i24 = build_root_system(Family::I2, 4, None).unwrap();
        let i24m = MultiplicityFunction::uniform(0.3, &i24).unwrap();
        vec![(b2, b2m, "B2"), (a3, a3m, "A3"), (i24, i24m, "I2(4)")]
    };
    for (system, mult, label) in cases {
        let mut cfg = SimulationConfig::new(system, mult).unwrap();
        cfg.dt = 1e-4;
        cfg.horizon = 0.5;
        cfg.seed = 31;
        // tight substep threshold: wall-crossing overshoot scales with theta
        cfg.substep_threshold = 0.01;
        let rank = cfg.system.rank();
        let mut worst = f64::NEG_INFINITY;
        let mut tol = 0.0f64;
        for simple in 0..rank {
            let gaps: Vec<(f64, f64)> = (0..100u64)
                .into_par_iter()
                .map(|path| {
                    let (y, z) = couple_simple_root(&cfg, simple, path).unwrap();
                    let zmax = z.values().iter().cloned().fold(0.0f64, f64::max);
                    let gap = y
                        .values()
                        .iter()
                        .zip(z.values())
                        .map(|(a, b)| a - b)
                        .fold(f64::NEG_INFINITY, f64::max);
                    (gap, 1e-3 * zmax.max(1.0))
                })
                .collect();
            for (gap, t) in gaps {
                pass &= gap <= t;
                worst = worst.max(gap);
                tol = tol.max(t);
            }
        }
        detail.push_str(&format!("{label}: max Y-Z {worst:.3e} (tol {tol:.3e}); "));
    }
    // rank-1: identical update law, must agree to fp accumulation level
    let a1 = build_root_system(Family::A, 2, None).unwrap();
    let a1m = MultiplicityFunction::uniform(0.6, &a1).unwrap();
    let mut cfg = SimulationConfig::new(a1, a1m).unwrap();
    cfg.dt = 1e-3;
    cfg.horizon = 1.0;
    cfg.seed = 31;
    let mut rank1_worst = 0.0f64;
    for path in 0..100u64 {
        let (y, z) = couple_simple_root(&cfg, 0, path).unwrap();
        for (a, b) in y.values().iter().zip(z.values()) {
            rank1_worst = rank1_worst.max((a - b).abs());
        }
    }
    pass &= rank1_worst <= 1e-12;
    detail.push_str(&format!("rank-1 max |Y-Z| {rank1_worst:.3e} (tol 1e-12)"));
    report(9, "coupling_bound", pass, &detail);
}

#[test]
fn criterion_10_monotone_time_change() {
    let system = build_root_system(Family::A, 3, None).unwrap();
    let mult = MultiplicityFunction::uniform(0.3, &system).unwrap();
    let mut cfg = SimulationConfig::new(system, mult).unwrap();
    cfg.dt = 1e-4;
    cfg.horizon = 0.5;
    cfg.seed = 77;
    let ctx = AlgebraContext::new(&cfg.system, &cfg.multiplicity).unwrap();
    let flats: usize = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let p = simulate_radial_dunkl(&cfg, i).unwrap();
            let tc = compute_time_change(&p, &ctx).unwrap();
            monotonicity_audit(&tc).flat_count
        })
        .sum();
    report(
        10,
        "monotone_time_change",
        flats == 0,
        &format!("flat_count total {flats} over 100 interior-start paths"),
    );
}

fn run_cli(args: &[&str], dir: &std::path::Path) {
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_dunkl"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .status()
        .unwrap();
    assert!(status.success(), "dunkl {args:?} failed");
}

fn dir_bytes(dir: &std::path::Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        out.insert(
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path()).unwrap(),
        );
    }
    out
}

#[test]
fn criterion_11_determinism() {
    let base = std::env::temp_dir().join("dunkl-acceptance-determinism");
    std::fs::remove_dir_all(&base).ok();
    std::fs::create_dir_all(&base).unwrap();
    let sim_args = [
        "simulate", "--family", "A", "--size", "3", "--k", "0.3", "--dt", "0.001", "--horizon",
        "0.1", "--paths", "3", "--seed", "5",
    ];
    let (s1, s2) = (base.join("sim1"), base.join("sim2"));
    run_cli(&sim_args, &s1);
    run_cli(&sim_args, &s2);
    let same_sim = dir_bytes(&s1) == dir_bytes(&s2);

    let dim_args = [
        "dim", "--family", "A", "--size", "3", "--k", "0.25", "--dt", "0.0001", "--horizon", "1",
        "--paths", "8", "--seed", "5", "--set", "x0=-0.0707107,0,0.0707107",
    ];
    let (d1, d2) = (base.join("dim1"), base.join("dim2"));
    run_cli(&dim_args, &d1);
    run_cli(&dim_args, &d2);
    let same_dim = dir_bytes(&d1) == dir_bytes(&d2);
    std::fs::remove_dir_all(&base).ok();
    report(
        11,
        "byte_identical_reruns",
        same_sim && same_dim,
        &format!("simulate identical: {same_sim}, dim identical: {same_dim}"),
    );
}
