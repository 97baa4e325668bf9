//! Statistical comparison utilities backing the verification suite.

use crate::error::{Error, Result};
use crate::sde::{PathRecord, TimeChange};
use serde::Serialize;

const KS_MIN_SAMPLES: usize = 30;
/// Asymptotic two-sample critical constant at the 1% level.
const KS_CRITICAL_1PCT: f64 = 1.628;

#[derive(Debug, Clone, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub n1: usize,
    pub n2: usize,
    pub critical_1pct: f64,
    pub pass: bool,
}

/// Two-sample Kolmogorov-Smirnov test at the 1% level.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let (n1, n2) = (a.len(), b.len());
    if n1 < KS_MIN_SAMPLES || n2 < KS_MIN_SAMPLES {
        return Err(Error::DegenerateInput(format!(
            "KS needs >= {KS_MIN_SAMPLES} samples per side, got {n1} and {n2}"
        )));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        // advance both past ties so the sup is taken at distinct values only
        let v = sa[i].min(sb[j]);
        while i < n1 && sa[i] == v {
            i += 1;
        }
        while j < n2 && sb[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let critical_1pct =
        KS_CRITICAL_1PCT * (((n1 + n2) as f64) / ((n1 * n2) as f64)).sqrt();
    Ok(KsResult {
        statistic: d,
        n1,
        n2,
        critical_1pct,
        pass: d < critical_1pct,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentCheck {
    pub sample_mean: f64,
    pub target_mean: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// Three-sigma Monte Carlo mean check against a known target.
pub fn mc_moment_check(samples: &[f64], target_mean: f64) -> Result<MomentCheck> {
    let n = samples.len();
    if n < 100 {
        return Err(Error::DegenerateInput(format!(
            "moment check needs >= 100 samples, got {n}"
        )));
    }
    let nn = n as f64;
    let mean = samples.iter().sum::<f64>() / nn;
    let var = samples
        .iter()
        .map(|s| (s - mean) * (s - mean))
        .sum::<f64>()
        / (nn - 1.0);
    let se = (var / nn).sqrt();
    let z_score = if se > 0.0 {
        (mean - target_mean) / se
    } else if mean == target_mean {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(MomentCheck {
        sample_mean: mean,
        target_mean,
        z_score,
        pass: z_score.abs() <= 3.0,
    })
}

/// Sum(dY_i)^2 / (4 Sum Y_i dt_i) on an arbitrary increasing grid. For a true
/// squared Bessel path the ratio tends to 1 as the mesh refines, since
/// d[Y] = 4 Y dt.
pub fn quadratic_variation_ratio(values: &[f64], times: &[f64]) -> Result<f64> {
    if values.len() != times.len() || values.len() < 1001 {
        return Err(Error::DegenerateInput(format!(
            "quadratic variation needs >= 1000 steps on matching grids, got {}",
            values.len().saturating_sub(1)
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..values.len() {
        let dy = values[i] - values[i - 1];
        let dti = times[i] - times[i - 1];
        if dti <= 0.0 {
            return Err(Error::DegenerateInput(format!(
                "non-increasing time grid at index {i}"
            )));
        }
        num += dy * dy;
        den += 4.0 * values[i - 1] * dti;
    }
    if den <= 0.0 {
        return Err(Error::DegenerateInput(
            "degenerate quadratic-variation denominator (path identically zero)".into(),
        ));
    }
    Ok(num / den)
}

/// Diagnostic on a uniform-grid 1-D record.
pub fn quadratic_variation_diagnostic(path: &PathRecord) -> Result<f64> {
    let times: Vec<f64> = (0..=path.steps()).map(|i| path.time(i)).collect();
    quadratic_variation_ratio(path.values(), &times)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub strict: bool,
    pub min_increment: f64,
    pub flat_count: usize,
}

/// Count non-positive increments of the clock; strict iff there are none.
pub fn monotonicity_audit(tc: &TimeChange) -> MonotonicityReport {
    let v = tc.values();
    let flat_count = v.windows(2).filter(|w| w[1] <= w[0]).count();
    MonotonicityReport {
        strict: flat_count == 0,
        min_increment: tc.min_increment(),
        flat_count,
    }
}
