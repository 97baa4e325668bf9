//! Weight function, squared alternating polynomial V and its derivatives,
//! the time-change density S, the SDE drift field, and the cross-term
//! cancellation probe.

use crate::error::{Error, Result};
use crate::root_system::{min_wall_distance, RootSystem};
use serde::{Deserialize, Serialize};

/// Positive multiplicity per reflection-group orbit, indexed by orbit id.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiplicityFunction {
    per_orbit: Vec<f64>,
}

impl MultiplicityFunction {
    pub fn new(per_orbit: Vec<f64>, system: &RootSystem) -> Result<Self> {
        if per_orbit.len() != system.orbit_count() {
            return Err(Error::InvalidMultiplicity(format!(
                "expected {} orbit values, got {}",
                system.orbit_count(),
                per_orbit.len()
            )));
        }
        if let Some(k) = per_orbit.iter().find(|k| !(**k > 0.0)) {
            return Err(Error::InvalidMultiplicity(format!(
                "multiplicities must be strictly positive, got {k}"
            )));
        }
        Ok(MultiplicityFunction { per_orbit })
    }

    pub fn uniform(k: f64, system: &RootSystem) -> Result<Self> {
        Self::new(vec![k; system.orbit_count()], system)
    }

    pub fn per_orbit(&self) -> &[f64] {
        &self.per_orbit
    }

    pub fn min(&self) -> f64 {
        self.per_orbit.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Cached per-positive-root data for repeated evaluation along paths.
#[derive(Debug, Clone)]
pub struct AlgebraContext<'a> {
    system: &'a RootSystem,
    /// k-value per positive root (per_orbit resolved through the orbit ids).
    k: Vec<f64>,
}

/// Residual of the cross-term identity together with the magnitude of its
/// largest contributing term, for relative-tolerance checks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossTermProbe {
    pub residual: f64,
    pub largest_term: f64,
}

impl<'a> AlgebraContext<'a> {
    pub fn new(system: &'a RootSystem, multiplicity: &MultiplicityFunction) -> Result<Self> {
        if multiplicity.per_orbit().len() != system.orbit_count() {
            return Err(Error::InvalidMultiplicity(
                "multiplicity does not match the system's orbit count".into(),
            ));
        }
        let k = system
            .orbit_ids()
            .iter()
            .map(|&o| multiplicity.per_orbit()[o])
            .collect();
        Ok(AlgebraContext { system, k })
    }

    pub fn system(&self) -> &RootSystem {
        self.system
    }

    pub fn k_per_root(&self) -> &[f64] {
        &self.k
    }

    pub fn min_k(&self) -> f64 {
        self.k.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn dots(&self, x: &[f64]) -> Vec<f64> {
        self.system.positive().iter().map(|r| r.dot(x)).collect()
    }

    /// w_k(x) = prod <a,x>^{2k(a)} over positive roots; zero on the boundary.
    pub fn weight(&self, x: &[f64]) -> Result<f64> {
        let scale = 1e-9 * (1.0 + crate::linalg::norm(x));
        let mut w = 1.0;
        for (i, r) in self.system.positive().iter().enumerate() {
            let d = r.dot(x);
            if d < -scale {
                return Err(Error::OutsideChamber {
                    root_index: i,
                    value: d,
                });
            }
            w *= d.max(0.0).powf(2.0 * self.k[i]);
        }
        Ok(w)
    }

    /// V(x) = prod <a,x>^2 over positive roots. Defined on all of R^N.
    pub fn alt_poly_sq(&self, x: &[f64]) -> f64 {
        self.dots(x).iter().map(|d| d * d).product()
    }

    /// Gradient of V: component i is 2 V(x) sum_a a_i / <a,x>.
    pub fn grad_alt_poly_sq(&self, x: &[f64]) -> Result<Vec<f64>> {
        let dots = self.dots(x);
        self.check_off_walls(&dots, 1e-14)?;
        let v = dots.iter().map(|d| d * d).product::<f64>();
        let mut grad = vec![0.0; x.len()];
        for (r, d) in self.system.positive().iter().zip(&dots) {
            let c = 2.0 * v / d;
            crate::linalg::axpy(&mut grad, c, r.coords());
        }
        Ok(grad)
    }

    /// S(x) = sum_a ||a||^2 prod_{b != a} <b,x>^2, evaluated in the wall-safe
    /// product form so it stays finite on the boundary. Equals
    /// V(x) sum ||a||^2 / <a,x>^2 on the interior.
    pub fn time_change_density(&self, x: &[f64]) -> f64 {
        let dots = self.dots(x);
        let n = dots.len();
        // prefix[i] = prod_{j<i} d_j^2, suffix[i] = prod_{j>i} d_j^2
        let mut prefix = vec![1.0; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] * dots[i] * dots[i];
        }
        let mut suffix = vec![1.0; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] * dots[i] * dots[i];
        }
        self.system
            .positive()
            .iter()
            .enumerate()
            .map(|(i, r)| r.squared_norm() * prefix[i] * suffix[i + 1])
            .sum()
    }

    /// Numerical probe of the Dunkl cross-term cancellation
    /// sum_{a != b} k(b) <a,b> / (<a,x><b,x>) = 0 for G-invariant k.
    pub fn cross_term_probe(&self, x: &[f64]) -> Result<CrossTermProbe> {
        let d = min_wall_distance(x, self.system)?;
        if d <= 1e-8 {
            return Err(Error::WallProximity {
                root_index: 0,
                value: d,
            });
        }
        let dots = self.dots(x);
        let pos = self.system.positive();
        let mut residual = 0.0;
        let mut largest = 0.0f64;
        for (a, ra) in pos.iter().enumerate() {
            for (b, rb) in pos.iter().enumerate() {
                if a == b {
                    continue;
                }
                let term = self.k[b] * ra.dot(rb.coords()) / (dots[a] * dots[b]);
                residual += term;
                largest = largest.max(term.abs());
            }
        }
        Ok(CrossTermProbe {
            residual,
            largest_term: largest,
        })
    }

    pub fn cross_term_sum(&self, x: &[f64]) -> Result<f64> {
        Ok(self.cross_term_probe(x)?.residual)
    }

    /// Singular drift field sum_a k(a) a / <a,x>.
    pub fn drift(&self, x: &[f64]) -> Result<Vec<f64>> {
        let dots = self.dots(x);
        self.check_off_walls(&dots, 1e-14)?;
        let mut out = vec![0.0; x.len()];
        for (i, r) in self.system.positive().iter().enumerate() {
            crate::linalg::axpy(&mut out, self.k[i] / dots[i], r.coords());
        }
        Ok(out)
    }

    fn check_off_walls(&self, dots: &[f64], tol: f64) -> Result<()> {
        for (i, d) in dots.iter().enumerate() {
            if d.abs() < tol {
                return Err(Error::WallProximity {
                    root_index: i,
                    value: *d,
                });
            }
        }
        Ok(())
    }
}
