//! Collision-time extraction and box-counting dimension estimation.
//!
//! The box dimension of the wall-hit set is the measurable proxy for the
//! Hausdorff dimension of boundary collision times; the estimator is
//! calibrated on sets with known dimension (interval, point, Cantor dusts).

use crate::error::{Error, Result};
use crate::root_system::{min_wall_distance, RootSystem};
use crate::sde::PathRecord;
use serde::Serialize;

/// Grid times at which a path is within `epsilon` of the chamber boundary.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroSet {
    pub hit_times: Vec<f64>,
    pub epsilon: f64,
    pub dt: f64,
    pub horizon: f64,
}

impl ZeroSet {
    pub fn is_empty(&self) -> bool {
        self.hit_times.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DimEstimate {
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub stderr: f64,
    /// Index range of `scales` used for the fit (half-open).
    pub fit_window: (usize, usize),
}

/// Median-of-paths aggregate over an ensemble of zero sets.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleDimEstimate {
    pub median_slope: f64,
    pub iqr: f64,
    pub empty_fraction: f64,
    pub path_count: usize,
    pub slopes: Vec<f64>,
    pub scales: Vec<f64>,
    pub per_path: Vec<Option<DimEstimate>>,
}

/// Grid times with min_wall_distance <= epsilon_coeff * sqrt(dt).
/// `epsilon_coeff = 0` keeps only exact (snapped) wall contacts.
pub fn extract_collision_times(
    path: &PathRecord,
    system: &RootSystem,
    epsilon_coeff: f64,
) -> Result<ZeroSet> {
    let epsilon = epsilon_coeff * path.dt.sqrt();
    let mut hit_times = Vec::new();
    for i in 0..=path.steps() {
        let d = min_wall_distance(path.state(i), system)?;
        if d <= epsilon {
            hit_times.push(path.time(i));
        }
    }
    Ok(ZeroSet {
        hit_times,
        epsilon,
        dt: path.dt,
        horizon: path.horizon(),
    })
}

/// Zero set of a nonnegative scalar path: grid times with Y <= epsilon^2
/// (epsilon on the radial scale, threshold on the squared process).
pub fn scalar_zero_set(path: &PathRecord, epsilon: f64) -> ZeroSet {
    let thr = epsilon * epsilon;
    let hit_times = (0..=path.steps())
        .filter(|&i| path.values()[i] <= thr)
        .map(|i| path.time(i))
        .collect();
    ZeroSet {
        hit_times,
        epsilon,
        dt: path.dt,
        horizon: path.horizon(),
    }
}

/// Number of grid-aligned intervals [m d, (m+1) d) containing a hit time,
/// per scale.
pub fn box_counts(zs: &ZeroSet, scales: &[f64]) -> Result<Vec<u64>> {
    scales
        .iter()
        .map(|&delta| {
            if delta < zs.dt * (1.0 - 1e-12) {
                return Err(Error::DegenerateInput(format!(
                    "scale {delta} below grid resolution {}",
                    zs.dt
                )));
            }
            let top = (zs.horizon / delta).ceil() as i64 - 1;
            let mut count = 0u64;
            let mut last: Option<i64> = None;
            for &t in &zs.hit_times {
                // the nudge absorbs fp error in t/delta for times that are an
                // exact multiple of delta; hit spacing is always >> 1e-9*delta
                let m = (((t / delta) + 1e-9).floor() as i64).min(top.max(0));
                if last != Some(m) {
                    count += 1;
                    last = Some(m);
                }
            }
            Ok(count)
        })
        .collect()
}

/// Dyadic scales T / 2^j with T / 2^j >= dt, in increasing order.
pub fn dyadic_scales(dt: f64, horizon: f64) -> Vec<f64> {
    let jmax = (horizon / dt).log2().floor() as i32;
    (0..=jmax.max(0))
        .rev()
        .map(|j| horizon / f64::powi(2.0, j))
        .collect()
}

/// Indices of `scales` lying in [16 dt, T/16], the band between the
/// resolution floor and the horizon ceiling.
pub fn default_fit_window(scales: &[f64], dt: f64, horizon: f64) -> (usize, usize) {
    let lo = 16.0 * dt * (1.0 - 1e-9);
    let hi = horizon / 16.0 * (1.0 + 1e-9);
    let start = scales.partition_point(|&s| s < lo);
    let end = scales.partition_point(|&s| s <= hi);
    (start, end)
}

/// OLS slope of log N(d) against log(1/d) over the window.
pub fn fit_dimension(
    counts: &[u64],
    scales: &[f64],
    fit_window: (usize, usize),
) -> Result<DimEstimate> {
    let (lo, hi) = fit_window;
    if hi > scales.len() || lo >= hi || counts.len() != scales.len() {
        return Err(Error::DegenerateInput("bad fit window".into()));
    }
    let n = hi - lo;
    if n < 4 {
        return Err(Error::DegenerateInput(format!(
            "need >= 4 scales in fit window, got {n}"
        )));
    }
    if counts[lo..hi].iter().any(|&c| c == 0) {
        return Err(Error::DegenerateInput("zero box count inside window".into()));
    }
    let xs: Vec<f64> = scales[lo..hi].iter().map(|&s| (1.0 / s).ln()).collect();
    let ys: Vec<f64> = counts[lo..hi].iter().map(|&c| (c as f64).ln()).collect();
    let nn = n as f64;
    let xbar = xs.iter().sum::<f64>() / nn;
    let ybar = ys.iter().sum::<f64>() / nn;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx < 1e-12 {
        return Err(Error::DegenerateInput("degenerate scale window".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - ybar - slope * (x - xbar);
            e * e
        })
        .sum();
    let stderr = if n > 2 {
        (ss_res / (nn - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(DimEstimate {
        scales: scales.to_vec(),
        counts: counts.to_vec(),
        slope: slope.clamp(-0.05, 1.05),
        stderr,
        fit_window,
    })
}

/// Per-zero-set fits aggregated by median slope; empty sets are skipped and
/// reported through `empty_fraction`.
pub fn estimate_dim_from_zero_sets(
    zero_sets: &[ZeroSet],
    scales: &[f64],
) -> Result<EnsembleDimEstimate> {
    if zero_sets.is_empty() {
        return Err(Error::DegenerateInput("no zero sets".into()));
    }
    let mut per_path = Vec::with_capacity(zero_sets.len());
    let mut slopes = Vec::new();
    let mut empty = 0usize;
    for zs in zero_sets {
        if zs.is_empty() {
            empty += 1;
            per_path.push(None);
            continue;
        }
        let counts = box_counts(zs, scales)?;
        let window = default_fit_window(scales, zs.dt, zs.horizon);
        let est = fit_dimension(&counts, scales, window)?;
        slopes.push(est.slope);
        per_path.push(Some(est));
    }
    let empty_fraction = empty as f64 / zero_sets.len() as f64;
    if slopes.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "all {} zero sets empty (empty_fraction = 1); either a no-collision \
             regime (min k >= 1/2) or dt is under-resolved",
            zero_sets.len()
        )));
    }
    let mut sorted = slopes.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(EnsembleDimEstimate {
        median_slope: quantile(&sorted, 0.5),
        iqr: quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
        empty_fraction,
        path_count: zero_sets.len(),
        slopes,
        scales: scales.to_vec(),
        per_path,
    })
}

/// Extract-and-estimate over a shared-grid ensemble.
pub fn estimate_zero_dim_ensemble(
    paths: &[PathRecord],
    system: &RootSystem,
    epsilon_coeff: f64,
    scales: &[f64],
) -> Result<EnsembleDimEstimate> {
    let zero_sets: Result<Vec<ZeroSet>> = paths
        .iter()
        .map(|p| extract_collision_times(p, system, epsilon_coeff))
        .collect();
    estimate_dim_from_zero_sets(&zero_sets?, scales)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Cantor dust on [0,1] keeping the first and last of `base` subintervals at
/// each of `depth` levels; `hit_times` are the 2^depth left endpoints of the
/// surviving depth-level intervals. Similarity dimension log 2 / log base.
pub fn cantor_zero_set(base: u32, depth: u32) -> ZeroSet {
    assert!(base >= 3 && depth >= 1 && depth < 26);
    let dt = f64::powi(base as f64, -(depth as i32));
    let top_digit = (base - 1) as f64;
    let n = 1u64 << depth;
    let mut hit_times = Vec::with_capacity(n as usize);
    for i in 0..n {
        let mut t = 0.0;
        let mut scale = 1.0;
        for level in 0..depth {
            scale /= base as f64;
            // MSB-first so the times come out sorted
            if (i >> (depth - 1 - level)) & 1 == 1 {
                t += top_digit * scale;
            }
        }
        hit_times.push(t);
    }
    ZeroSet {
        hit_times,
        epsilon: dt,
        dt,
        horizon: 1.0,
    }
}
