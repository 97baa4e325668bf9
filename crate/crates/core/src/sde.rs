//! Singular-drift SDE integration for the multivariate Bessel process,
//! exact squared-Bessel reference sampling, the random time change and its
//! inverse, and shared-noise couplings against 1-D comparison processes.

use crate::algebra::{AlgebraContext, MultiplicityFunction};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::root_system::{chamber_project, default_interior_point, min_wall_distance, RootSystem};
use crate::rng::{gaussian_refined, mix};
use rand::SeedableRng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::Serialize;

/// Relative floor below which a recorded state counts as a wall contact and
/// is snapped onto the nearest wall.
const WALL_SNAP_REL: f64 = 1e-9;
/// Reflection floor for the 1-D comparison process.
const Z_FLOOR: f64 = 1e-12;
/// Drift terms with |<a,x>| below this are dropped (state is on that wall).
const DRIFT_DOT_FLOOR: f64 = 1e-14;
/// Domain tag separating the exact-sampler stream from the driver lanes.
const BESQ_STREAM_TAG: u64 = 0xBE59_0000_0000_0001;

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub system: RootSystem,
    pub multiplicity: MultiplicityFunction,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    /// Substep threshold theta: a step splits while ||drift|| * h > theta * wall distance.
    pub substep_threshold: f64,
    /// Maximum substeps per macro step; power of two.
    pub max_substeps: u32,
    pub seed: u64,
    pub path_count: usize,
}

impl SimulationConfig {
    pub fn new(system: RootSystem, multiplicity: MultiplicityFunction) -> Result<Self> {
        let x0 = default_interior_point(&system)?;
        Ok(SimulationConfig {
            system,
            multiplicity,
            x0,
            horizon: 1.0,
            dt: 1e-4,
            substep_threshold: 0.1,
            max_substeps: 1 << 12,
            seed: 1,
            path_count: 8,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.x0.len() != self.system.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.system.ambient_dim(),
                got: self.x0.len(),
            });
        }
        let d = min_wall_distance(&self.x0, &self.system)
            .map_err(|_| Error::InvalidConfig("x0 is outside the closed Weyl chamber".into()))?;
        if d <= 0.0 {
            return Err(Error::InvalidConfig("x0 must be interior".into()));
        }
        if !(self.dt > 0.0 && self.dt < self.horizon) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < dt < horizon, got dt = {}, horizon = {}",
                self.dt, self.horizon
            )));
        }
        if !(self.substep_threshold > 0.0 && self.substep_threshold < 1.0) {
            return Err(Error::InvalidConfig(
                "substep threshold must lie in (0, 1)".into(),
            ));
        }
        if !self.max_substeps.is_power_of_two() {
            return Err(Error::InvalidConfig(
                "max_substeps must be a power of two".into(),
            ));
        }
        if self.path_count == 0 {
            return Err(Error::InvalidConfig("path_count must be positive".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    fn max_depth(&self) -> u32 {
        self.max_substeps.trailing_zeros()
    }
}

/// One simulated path on a uniform macro grid. `states` is row-major:
/// state `i` occupies `[i * dim, (i + 1) * dim)` and sits at time `i * dt`.
#[derive(Debug, Clone, Serialize)]
pub struct PathRecord {
    pub dim: usize,
    pub dt: f64,
    pub states: Vec<f64>,
    pub seed: u64,
    pub path_index: u64,
    pub substep_total: u64,
    pub wall_snap_count: u64,
}

impl PathRecord {
    pub fn steps(&self) -> usize {
        self.states.len() / self.dim - 1
    }

    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Scalar view for 1-D records.
    pub fn values(&self) -> &[f64] {
        assert_eq!(self.dim, 1);
        &self.states
    }
}

/// Cumulative values of the random clock s(t) on the macro grid.
#[derive(Debug, Clone, Serialize)]
pub struct TimeChange {
    values: Vec<f64>,
    dt: f64,
}

impl TimeChange {
    pub fn new(values: Vec<f64>, dt: f64) -> Self {
        debug_assert!(values.first().map(|v| *v == 0.0).unwrap_or(false));
        TimeChange { values, dt }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn min_increment(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

struct Companion {
    beta: Vec<f64>,
    beta_norm: f64,
    k_beta: f64,
    z: f64,
}

struct Stepper<'a> {
    ctx: &'a AlgebraContext<'a>,
    theta: f64,
    max_depth: u32,
    seed: u64,
    path_index: u64,
    dim: usize,
    substeps: u64,
    companion: Option<Companion>,
}

impl<'a> Stepper<'a> {
    /// Wall distance together with the drift restricted to walls the state is
    /// not sitting on. On-wall terms are dropped; the noise moves the state
    /// off the wall within the substep and the next evaluation sees the full
    /// field again.
    fn wall_distance_and_drift(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let pos = self.ctx.system().positive();
        let k = self.ctx.k_per_root();
        let mut dmin = f64::INFINITY;
        let mut drift = vec![0.0; x.len()];
        for (i, r) in pos.iter().enumerate() {
            let d = r.dot(x);
            dmin = dmin.min((d / r.norm()).max(0.0));
            if d.abs() >= DRIFT_DOT_FLOOR {
                crate::linalg::axpy(&mut drift, k[i] / d, r.coords());
            }
        }
        (dmin, drift)
    }

    fn advance(
        &mut self,
        x: &mut Vec<f64>,
        step: u64,
        depth: u32,
        branch: u64,
        h: f64,
    ) -> Result<()> {
        let (d, drift) = self.wall_distance_and_drift(x);
        let drift_norm = norm(&drift);
        let mut split = drift_norm * h > self.theta * d;
        if let Some(c) = &self.companion {
            split = split || c.k_beta / c.z * h > self.theta * c.z;
        }
        if split && depth < self.max_depth {
            self.advance(x, step, depth + 1, 2 * branch, h / 2.0)?;
            self.advance(x, step, depth + 1, 2 * branch + 1, h / 2.0)?;
            return Ok(());
        }
        // Leaf substep. The drift displacement is clamped to theta * wall
        // distance so an unresolvable singular term cannot overshoot; at that
        // scale the noise dominates the exact dynamics anyway.
        let clamp = if drift_norm * h > self.theta * d {
            if drift_norm * h > 0.0 {
                self.theta * d / (drift_norm * h)
            } else {
                1.0
            }
        } else {
            1.0
        };
        let xi = gaussian_refined(self.seed, self.path_index, step, depth, branch, self.dim);
        let sh = h.sqrt();
        for i in 0..self.dim {
            x[i] += sh * xi[i] + clamp * drift[i] * h;
        }
        if let Some(c) = &mut self.companion {
            let db = dot(&xi, &c.beta) / c.beta_norm * sh;
            let zdrift = c.k_beta / c.z * h;
            let zclamp = if c.k_beta / c.z * h > self.theta * c.z {
                self.theta * c.z / zdrift
            } else {
                1.0
            };
            let znew = c.z + db + zclamp * zdrift;
            c.z = znew.abs().max(Z_FLOOR);
        }
        *x = chamber_project(x, self.ctx.system()).map_err(|e| Error::IntegratorFailure {
            path_index: self.path_index,
            detail: e.to_string(),
        })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegratorFailure {
                path_index: self.path_index,
                detail: "non-finite state".into(),
            });
        }
        self.substeps += 1;
        Ok(())
    }
}

fn snap_to_wall(x: &mut [f64], system: &RootSystem) -> bool {
    let scale = WALL_SNAP_REL * (1.0 + norm(x));
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in system.positive().iter().enumerate() {
        let d = r.dot(x) / r.norm();
        if best.map(|(_, b)| d < b).unwrap_or(true) {
            best = Some((i, d));
        }
    }
    match best {
        Some((i, d)) if d.abs() < scale => {
            let r = &system.positive()[i];
            let c = r.dot(x) / r.squared_norm();
            crate::linalg::axpy(x, -c, r.coords());
            true
        }
        _ => false,
    }
}

fn run_scheme(
    cfg: &SimulationConfig,
    path_index: u64,
    companion_simple: Option<usize>,
) -> Result<(PathRecord, Option<PathRecord>)> {
    cfg.validate()?;
    let ctx = AlgebraContext::new(&cfg.system, &cfg.multiplicity)?;
    let dim = cfg.system.ambient_dim();
    let steps = cfg.steps();

    let companion = companion_simple
        .map(|si| -> Result<Companion> {
            let &pos_index = cfg
                .system
                .simple_indices()
                .get(si)
                .ok_or_else(|| Error::InvalidConfig(format!("no simple root with index {si}")))?;
            let beta = &cfg.system.positive()[pos_index];
            Ok(Companion {
                beta: beta.coords().to_vec(),
                beta_norm: beta.norm(),
                k_beta: ctx.k_per_root()[pos_index],
                z: beta.dot(&cfg.x0) / beta.norm(),
            })
        })
        .transpose()?;
    let beta_view = companion.as_ref().map(|c| (c.beta.clone(), c.beta_norm));

    let mut stepper = Stepper {
        ctx: &ctx,
        theta: cfg.substep_threshold,
        max_depth: cfg.max_depth(),
        seed: cfg.seed,
        path_index,
        dim,
        substeps: 0,
        companion,
    };

    let mut x = cfg.x0.clone();
    let mut states = Vec::with_capacity((steps + 1) * dim);
    states.extend_from_slice(&x);
    let mut z_values = beta_view.as_ref().map(|_| {
        let mut v = Vec::with_capacity(steps + 1);
        v.push(stepper.companion.as_ref().unwrap().z);
        v
    });
    let mut wall_snaps = 0u64;

    for step in 0..steps as u64 {
        stepper.advance(&mut x, step, 0, 0, cfg.dt)?;
        if snap_to_wall(&mut x, &cfg.system) {
            wall_snaps += 1;
        }
        states.extend_from_slice(&x);
        if let (Some(zv), Some(c)) = (z_values.as_mut(), stepper.companion.as_ref()) {
            zv.push(c.z);
        }
    }

    let substep_total = stepper.substeps;
    let main = PathRecord {
        dim,
        dt: cfg.dt,
        states,
        seed: cfg.seed,
        path_index,
        substep_total,
        wall_snap_count: wall_snaps,
    };
    let z_record = z_values.map(|v| PathRecord {
        dim: 1,
        dt: cfg.dt,
        states: v,
        seed: cfg.seed,
        path_index,
        substep_total,
        wall_snap_count: 0,
    });
    Ok((main, z_record))
}

/// Euler-Maruyama with adaptive binary substepping and chamber projection.
pub fn simulate_radial_dunkl(cfg: &SimulationConfig, path_index: u64) -> Result<PathRecord> {
    run_scheme(cfg, path_index, None).map(|(p, _)| p)
}

/// All paths of the configured ensemble, in path-index order.
pub fn simulate_ensemble(cfg: &SimulationConfig) -> Result<Vec<PathRecord>> {
    (0..cfg.path_count as u64)
        .into_par_iter()
        .map(|i| simulate_radial_dunkl(cfg, i))
        .collect()
}

/// Simulate X and extract Y_b(t) = <X(t), b>/||b|| for the chosen simple
/// root, while integrating the comparison Bessel dZ = dB_b + k(b)/Z dt with
/// the identical projected noise and substep partitioning.
pub fn couple_simple_root(
    cfg: &SimulationConfig,
    simple_index: usize,
    path_index: u64,
) -> Result<(PathRecord, PathRecord)> {
    let (main, z) = run_scheme(cfg, path_index, Some(simple_index))?;
    let z = z.expect("companion requested");
    let pos_index = cfg.system.simple_indices()[simple_index];
    let beta = &cfg.system.positive()[pos_index];
    let y_states: Vec<f64> = (0..=main.steps())
        .map(|i| beta.dot(main.state(i)) / beta.norm())
        .collect();
    let y = PathRecord {
        dim: 1,
        dt: main.dt,
        states: y_states,
        seed: main.seed,
        path_index,
        substep_total: main.substep_total,
        wall_snap_count: main.wall_snap_count,
    };
    Ok((y, z))
}

/// Exact squared-Bessel transition sampling on a uniform grid:
/// `Y(t+h) = h * Q` with `Q` noncentral chi-square of `delta` degrees of
/// freedom and noncentrality `Y(t)/h`, realized as a Poisson-mixed central
/// chi-square (Gamma with scale 2).
pub fn simulate_besq_exact(
    delta: f64,
    y0: f64,
    steps: usize,
    dt: f64,
    seed: u64,
    path_index: u64,
) -> Result<PathRecord> {
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig("BESQ dimension must be positive".into()));
    }
    if !(y0 >= 0.0) {
        return Err(Error::InvalidConfig("BESQ start must be nonnegative".into()));
    }
    if !(dt > 0.0) || steps == 0 {
        return Err(Error::InvalidConfig("BESQ grid must be nonempty".into()));
    }
    let mut rng =
        rand_chacha::ChaCha8Rng::seed_from_u64(mix(&[BESQ_STREAM_TAG, seed, path_index]));
    let mut values = Vec::with_capacity(steps + 1);
    let mut y = y0;
    values.push(y);
    for _ in 0..steps {
        let lambda = y / (2.0 * dt);
        let pois = if lambda > 0.0 {
            Poisson::new(lambda)
                .map_err(|e| Error::InvalidConfig(format!("poisson: {e}")))?
                .sample(&mut rng)
        } else {
            0.0
        };
        let dof = delta + 2.0 * pois;
        let gamma = Gamma::new(dof / 2.0, 2.0)
            .map_err(|e| Error::InvalidConfig(format!("gamma: {e}")))?;
        y = dt * gamma.sample(&mut rng);
        values.push(y);
    }
    Ok(PathRecord {
        dim: 1,
        dt,
        states: values,
        seed,
        path_index,
        substep_total: steps as u64,
        wall_snap_count: 0,
    })
}

/// Trapezoidal cumulative integral of the time-change density S along a path.
pub fn compute_time_change(path: &PathRecord, ctx: &AlgebraContext<'_>) -> Result<TimeChange> {
    if path.dim != ctx.system().ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.system().ambient_dim(),
            got: path.dim,
        });
    }
    let mut values = Vec::with_capacity(path.steps() + 1);
    let mut acc = 0.0;
    values.push(0.0);
    let mut prev = ctx.time_change_density(path.state(0));
    for i in 1..=path.steps() {
        let cur = ctx.time_change_density(path.state(i));
        acc += 0.5 * (prev + cur) * path.dt;
        values.push(acc);
        prev = cur;
    }
    Ok(TimeChange::new(values, path.dt))
}

/// Piecewise-linear inverse of the clock: the time t with s(t) = target.
pub fn invert_time_change(tc: &TimeChange, target: f64) -> Result<f64> {
    let values = tc.values();
    let max = tc.last();
    if !(0.0..=max).contains(&target) {
        return Err(Error::TimeChangeOutOfRange { target, max });
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    // first index with s_i >= target
    let hi = values.partition_point(|&v| v < target);
    let lo = hi - 1;
    let (s0, s1) = (values[lo], values[hi]);
    if s1 <= s0 {
        if target == s0 {
            return Ok(lo as f64 * tc.dt());
        }
        return Err(Error::FlatTimeChange { index: lo });
    }
    Ok(tc.dt() * (lo as f64 + (target - s0) / (s1 - s0)))
}

/// V(X(s^{-1}(tau))) for each requested clock time tau, with V interpolated
/// linearly between bracketing grid states.
pub fn time_changed_v(
    path: &PathRecord,
    ctx: &AlgebraContext<'_>,
    tc: &TimeChange,
    out_times: &[f64],
) -> Result<Vec<f64>> {
    let v: Vec<f64> = (0..=path.steps())
        .map(|i| ctx.alt_poly_sq(path.state(i)))
        .collect();
    out_times
        .iter()
        .map(|&tau| {
            let t = invert_time_change(tc, tau)?;
            let pos = t / path.dt;
            let idx = (pos.floor() as usize).min(path.steps() - 1);
            let frac = (pos - idx as f64).clamp(0.0, 1.0);
            Ok(v[idx] * (1.0 - frac) + v[idx + 1] * frac)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::{build_root_system, Family};

    fn rank_one_cfg(k: f64) -> SimulationConfig {
        let system = build_root_system(Family::A, 2, None).unwrap();
        let m = MultiplicityFunction::uniform(k, &system).unwrap();
        SimulationConfig::new(system, m).unwrap()
    }

    fn a2_cfg(k: f64) -> SimulationConfig {
        let system = build_root_system(Family::A, 3, None).unwrap();
        let m = MultiplicityFunction::uniform(k, &system).unwrap();
        SimulationConfig::new(system, m).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut cfg = a2_cfg(0.3);
        assert!(cfg.validate().is_ok());
        cfg.dt = 2.0;
        assert!(cfg.validate().is_err());
        let mut cfg = a2_cfg(0.3);
        cfg.substep_threshold = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = a2_cfg(0.3);
        cfg.x0 = vec![1.0, 0.0, 0.0]; // outside the chamber
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn paths_are_deterministic() {
        let mut cfg = a2_cfg(0.4);
        cfg.dt = 1e-3;
        cfg.horizon = 0.1;
        let a = simulate_radial_dunkl(&cfg, 5).unwrap();
        let b = simulate_radial_dunkl(&cfg, 5).unwrap();
        assert_eq!(a.states, b.states);
        let c = simulate_radial_dunkl(&cfg, 6).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn states_stay_in_chamber() {
        let mut cfg = a2_cfg(0.2);
        cfg.dt = 1e-3;
        cfg.horizon = 0.2;
        let p = simulate_radial_dunkl(&cfg, 0).unwrap();
        for i in 0..=p.steps() {
            for g in cfg.system.simple_roots() {
                assert!(g.dot(p.state(i)) >= -1e-10);
            }
        }
    }

    #[test]
    fn rank_one_gap_mean_matches_besq_identity() {
        // gap^2 is BESQ-like: E[g(t)^2] = g(0)^2 + 2 (2k+1) t
        let k = 0.3;
        let mut cfg = rank_one_cfg(k);
        cfg.dt = 1e-3;
        cfg.horizon = 0.5;
        cfg.path_count = 256;
        let root = &cfg.system.positive()[0];
        let g0 = root.dot(&cfg.x0);
        let mut samples = Vec::new();
        for i in 0..cfg.path_count as u64 {
            let p = simulate_radial_dunkl(&cfg, i).unwrap();
            let g = root.dot(p.state(p.steps()));
            samples.push(g * g);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
        let target = g0 * g0 + 2.0 * (2.0 * k + 1.0) * cfg.horizon;
        let se = (var / n).sqrt();
        assert!(
            (mean - target).abs() < 3.0 * se + 0.05 * target,
            "mean {mean}, target {target}, se {se}"
        );
    }

    #[test]
    fn besq_exact_mean() {
        let (delta, y0, t) = (1.6, 1.0, 1.0);
        let n = 1024;
        let mut samples = Vec::new();
        for i in 0..n {
            let p = simulate_besq_exact(delta, y0, 4, t / 4.0, 99, i).unwrap();
            samples.push(*p.values().last().unwrap());
        }
        let nn = n as f64;
        let mean = samples.iter().sum::<f64>() / nn;
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (nn - 1.0);
        let target = y0 + delta * t;
        assert!((mean - target).abs() < 3.0 * (var / nn).sqrt());
    }

    #[test]
    fn besq_dimension_two_stays_positive() {
        // delta >= 2 almost surely never hits zero
        let mut low = 0;
        let n = 400;
        for i in 0..n {
            let p = simulate_besq_exact(2.5, 1.0, 1000, 1e-3, 7, i).unwrap();
            if p.values().iter().any(|&y| y < 1e-6) {
                low += 1;
            }
        }
        assert!((low as f64) < 0.005 * n as f64, "{low} of {n} dipped");
    }

    #[test]
    fn besq_zero_start_is_scaled_chi_square() {
        // y0 = 0: Y(t)/t ~ chi-square(delta) == Gamma(delta/2, 2)
        use crate::stats::ks_two_sample;
        let delta = 1.4;
        let t = 0.7;
        let a: Vec<f64> = (0..512)
            .map(|i| simulate_besq_exact(delta, 0.0, 1, t, 3, i).unwrap().values()[1] / t)
            .collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
        let g = Gamma::new(delta / 2.0, 2.0).unwrap();
        let b: Vec<f64> = (0..512).map(|_| g.sample(&mut rng)).collect();
        let ks = ks_two_sample(&a, &b).unwrap();
        assert!(ks.pass, "D = {}", ks.statistic);
    }

    #[test]
    fn besq_is_deterministic() {
        let a = simulate_besq_exact(1.6, 0.5, 100, 1e-2, 11, 4).unwrap();
        let b = simulate_besq_exact(1.6, 0.5, 100, 1e-2, 11, 4).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn time_change_rank_one_is_linear() {
        // S == 2 for the single root e_2 - e_1, so s(t) = 2t exactly
        let mut cfg = rank_one_cfg(0.6);
        cfg.dt = 1e-3;
        cfg.horizon = 0.25;
        let ctx = AlgebraContext::new(&cfg.system, &cfg.multiplicity).unwrap();
        let p = simulate_radial_dunkl(&cfg, 1).unwrap();
        let tc = compute_time_change(&p, &ctx).unwrap();
        assert_eq!(tc.values()[0], 0.0);
        for (i, &v) in tc.values().iter().enumerate() {
            assert!((v - 2.0 * i as f64 * cfg.dt).abs() < 1e-12);
        }
        // invert(v) = v / 2
        let t = invert_time_change(&tc, 0.3).unwrap();
        assert!((t - 0.15).abs() < 1e-12);
        assert_eq!(invert_time_change(&tc, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn invert_round_trip() {
        let mut cfg = a2_cfg(0.35);
        cfg.dt = 1e-3;
        cfg.horizon = 0.2;
        let ctx = AlgebraContext::new(&cfg.system, &cfg.multiplicity).unwrap();
        let p = simulate_radial_dunkl(&cfg, 3).unwrap();
        let tc = compute_time_change(&p, &ctx).unwrap();
        for i in (0..=p.steps()).step_by(17) {
            let t = invert_time_change(&tc, tc.values()[i]).unwrap();
            assert!((t - p.time(i)).abs() <= 1e-10 * cfg.horizon);
        }
        assert!(invert_time_change(&tc, tc.last() * 1.01).is_err());
    }

    #[test]
    fn time_changed_v_starts_at_v_x0() {
        let mut cfg = a2_cfg(0.3);
        cfg.dt = 1e-3;
        cfg.horizon = 0.2;
        let ctx = AlgebraContext::new(&cfg.system, &cfg.multiplicity).unwrap();
        let p = simulate_radial_dunkl(&cfg, 2).unwrap();
        let tc = compute_time_change(&p, &ctx).unwrap();
        let y = time_changed_v(&p, &ctx, &tc, &[0.0]).unwrap();
        assert!((y[0] - ctx.alt_poly_sq(&cfg.x0)).abs() < 1e-12);
    }

    #[test]
    fn coupling_rank_one_is_exact() {
        // single root: the extra drift sum is empty, Y and Z see identical
        // updates and must agree to fp accumulation level
        let mut cfg = rank_one_cfg(0.6);
        cfg.dt = 1e-3;
        cfg.horizon = 1.0;
        let (y, z) = couple_simple_root(&cfg, 0, 0).unwrap();
        let mut max_diff = 0.0f64;
        for (a, b) in y.values().iter().zip(z.values()) {
            max_diff = max_diff.max((a - b).abs());
        }
        assert!(max_diff <= 1e-12, "max diff {max_diff}");
        assert_eq!(y.values()[0], z.values()[0]);
    }

    #[test]
    fn coupling_order_b2() {
        let system = build_root_system(Family::B, 2, None).unwrap();
        let m = MultiplicityFunction::new(vec![0.2, 0.45], &system).unwrap();
        let mut cfg = SimulationConfig::new(system, m).unwrap();
        cfg.dt = 1e-3;
        cfg.horizon = 0.5;
        for simple in 0..cfg.system.rank() {
            for path in 0..10 {
                let (y, z) = couple_simple_root(&cfg, simple, path).unwrap();
                let zmax = z.values().iter().cloned().fold(0.0f64, f64::max);
                let tol = 1e-3 * zmax.max(1.0);
                for (a, b) in y.values().iter().zip(z.values()) {
                    assert!(a - b <= tol, "Y - Z = {} above tolerance {tol}", a - b);
                }
            }
        }
    }

    #[test]
    fn ensemble_is_ordered_and_deterministic() {
        let mut cfg = a2_cfg(0.5);
        cfg.dt = 1e-3;
        cfg.horizon = 0.05;
        cfg.path_count = 6;
        let e1 = simulate_ensemble(&cfg).unwrap();
        let e2 = simulate_ensemble(&cfg).unwrap();
        for (a, b) in e1.iter().zip(&e2) {
            assert_eq!(a.states, b.states);
        }
        for (i, p) in e1.iter().enumerate() {
            assert_eq!(p.path_index, i as u64);
        }
    }
}
