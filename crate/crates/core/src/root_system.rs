//! Reduced root systems, positive/simple subsystems, reflection-group orbits
//! and Weyl chamber geometry.
//!
//! Coordinates are plain `f64` throughout; the dihedral family I2(m) uses
//! trigonometric coordinates, everything else lives on the integer lattice.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, solve, sub};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Relative tolerance below which a chamber vector counts as orthogonal to a root.
pub const ORTHO_TOL: f64 = 1e-10;
/// Tolerance for matching a reflected root against the root table.
const MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    coords: Vec<f64>,
    squared_norm: f64,
}

impl Root {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let sq = dot(&coords, &coords);
        if sq <= 0.0 || !sq.is_finite() {
            return Err(Error::DegenerateInput("zero or non-finite root".into()));
        }
        Ok(Root {
            coords,
            squared_norm: sq,
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn squared_norm(&self) -> f64 {
        self.squared_norm
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm.sqrt()
    }

    /// Inner product with an arbitrary vector.
    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.coords, x)
    }

    pub fn negated(&self) -> Root {
        Root {
            coords: self.coords.iter().map(|c| -c).collect(),
            squared_norm: self.squared_norm,
        }
    }
}

/// Reflection of `y` across the hyperplane orthogonal to `x`.
pub fn reflect(y: &[f64], x: &Root) -> Vec<f64> {
    let c = 2.0 * x.dot(y) / x.squared_norm();
    let mut out = y.to_vec();
    axpy(&mut out, -c, x.coords());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    I2,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::I2 => "I2",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "C" | "c" => Ok(Family::C),
            "D" | "d" => Ok(Family::D),
            "I2" | "i2" => Ok(Family::I2),
            other => Err(Error::InvalidConfig(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RootSystem {
    family: Family,
    size: usize,
    ambient_dim: usize,
    /// The full system R, positives followed by their negatives.
    roots: Vec<Root>,
    positive: Vec<Root>,
    /// Indices into `positive`.
    simple: Vec<usize>,
    /// Orbit id per positive root; ids are ordered by squared norm, then by
    /// first occurrence, so for B/C the short orbit is always id 0.
    orbits: Vec<usize>,
    orbit_count: usize,
    chamber_vector: Vec<f64>,
}

impl RootSystem {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn positive(&self) -> &[Root] {
        &self.positive
    }

    pub fn simple_indices(&self) -> &[usize] {
        &self.simple
    }

    pub fn simple_roots(&self) -> impl Iterator<Item = &Root> {
        self.simple.iter().map(|&i| &self.positive[i])
    }

    pub fn orbit_ids(&self) -> &[usize] {
        &self.orbits
    }

    pub fn orbit_count(&self) -> usize {
        self.orbit_count
    }

    pub fn chamber_vector(&self) -> &[f64] {
        &self.chamber_vector
    }

    pub fn rank(&self) -> usize {
        self.simple.len()
    }
}

/// JSON document shape for the CLI `roots` subcommand.
#[derive(Debug, Serialize, Deserialize)]
pub struct RootSystemDoc {
    pub family: String,
    pub size: usize,
    pub ambient_dim: usize,
    pub positive: Vec<Vec<f64>>,
    pub simple: Vec<usize>,
    pub orbits: Vec<usize>,
    pub chamber_vector: Vec<f64>,
}

impl RootSystem {
    pub fn to_doc(&self) -> RootSystemDoc {
        RootSystemDoc {
            family: self.family.to_string(),
            size: self.size,
            ambient_dim: self.ambient_dim,
            positive: self.positive.iter().map(|r| r.coords().to_vec()).collect(),
            simple: self.simple.clone(),
            orbits: self.orbits.clone(),
            chamber_vector: self.chamber_vector.clone(),
        }
    }
}

fn basis_vector(dim: usize, i: usize, value: f64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = value;
    v
}

/// Full root table for the supported families.
fn full_roots(family: Family, size: usize) -> Result<(usize, Vec<Root>)> {
    let min = match family {
        Family::A | Family::B | Family::C => 2,
        Family::D | Family::I2 => 3,
    };
    if size < min {
        return Err(Error::SizeBelowMinimum {
            family: family.to_string(),
            size,
            min,
        });
    }
    let mut out = Vec::new();
    let ambient = match family {
        Family::A => {
            let n = size;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let mut v = vec![0.0; n];
                        v[j] = 1.0;
                        v[i] = -1.0;
                        out.push(Root::new(v)?);
                    }
                }
            }
            n
        }
        Family::B | Family::C => {
            let n = size;
            let tip = if family == Family::B { 1.0 } else { 2.0 };
            for i in 0..n {
                out.push(Root::new(basis_vector(n, i, tip))?);
                out.push(Root::new(basis_vector(n, i, -tip))?);
            }
            for i in 0..n {
                for j in i + 1..n {
                    for si in [1.0, -1.0] {
                        for sj in [1.0, -1.0] {
                            let mut v = vec![0.0; n];
                            v[i] = si;
                            v[j] = sj;
                            out.push(Root::new(v)?);
                        }
                    }
                }
            }
            n
        }
        Family::D => {
            let n = size;
            for i in 0..n {
                for j in i + 1..n {
                    for si in [1.0, -1.0] {
                        for sj in [1.0, -1.0] {
                            let mut v = vec![0.0; n];
                            v[i] = si;
                            v[j] = sj;
                            out.push(Root::new(v)?);
                        }
                    }
                }
            }
            n
        }
        Family::I2 => {
            let m = size;
            for j in 0..2 * m {
                let theta = std::f64::consts::PI * j as f64 / m as f64;
                out.push(Root::new(vec![theta.cos(), theta.sin()])?);
            }
            2
        }
    };
    Ok((ambient, out))
}

/// Deterministic generic chamber vector: u_i = sum_{j<=i} pi^j. Strictly
/// increasing components; non-orthogonal to every integer-coordinate root.
fn default_chamber_vector(dim: usize) -> Vec<f64> {
    let mut u = vec![0.0; dim];
    let mut acc = 0.0;
    let mut p = 1.0;
    for ui in u.iter_mut() {
        acc += p;
        *ui = acc;
        p *= std::f64::consts::PI;
    }
    u
}

fn check_generic(roots: &[Root], u: &[f64]) -> Result<()> {
    let un = norm(u);
    for (i, r) in roots.iter().enumerate() {
        let d = r.dot(u);
        if d.abs() <= ORTHO_TOL * r.norm() * un {
            return Err(Error::NonGenericChamberVector {
                root_index: i,
                value: d,
            });
        }
    }
    Ok(())
}

/// Half of `roots` on the positive side of `u`, in lexicographic coordinate order.
pub fn positive_subsystem(roots: &[Root], u: &[f64]) -> Result<Vec<Root>> {
    check_generic(roots, u)?;
    let mut pos: Vec<Root> = roots.iter().filter(|r| r.dot(u) > 0.0).cloned().collect();
    if 2 * pos.len() != roots.len() {
        return Err(Error::InvalidSystem(format!(
            "positive side holds {} of {} roots",
            pos.len(),
            roots.len()
        )));
    }
    pos.sort_by(|a, b| {
        a.coords()
            .iter()
            .zip(b.coords())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(pos)
}

/// Simple system of a positive subsystem: the roots that are not a positive
/// combination of two other positive roots (the extreme rays of the cone).
///
/// For crystallographic systems this coincides with the textbook "not a sum
/// of two positive roots" test; the combination form also covers dihedral
/// systems in trigonometric coordinates, where non-simple roots are positive
/// combinations with non-integer coefficients.
pub fn simple_system(positive: &[Root]) -> Result<Vec<usize>> {
    if positive.is_empty() {
        return Err(Error::DegenerateInput("empty positive system".into()));
    }
    let n = positive.len();
    let mut simple = Vec::new();
    'cand: for a in 0..n {
        let ra = &positive[a];
        for b in 0..n {
            if b == a {
                continue;
            }
            for c in b + 1..n {
                if c == a {
                    continue;
                }
                let rb = &positive[b];
                let rc = &positive[c];
                // Solve the 2x2 Gram system for ra ~ c1 rb + c2 rc.
                let g = [
                    rb.squared_norm(),
                    rb.dot(rc.coords()),
                    rb.dot(rc.coords()),
                    rc.squared_norm(),
                ];
                let rhs = [rb.dot(ra.coords()), rc.dot(ra.coords())];
                let Ok(coef) = solve(&g, &rhs, 2) else {
                    continue; // parallel pair, cannot represent a reduced root
                };
                if coef[0] < -1e-10 || coef[1] < -1e-10 {
                    continue;
                }
                let mut resid = ra.coords().to_vec();
                axpy(&mut resid, -coef[0], rb.coords());
                axpy(&mut resid, -coef[1], rc.coords());
                if norm(&resid) <= MATCH_TOL * ra.norm() {
                    continue 'cand; // decomposable, not simple
                }
            }
        }
        simple.push(a);
    }
    Ok(simple)
}

/// Index of `v` (up to sign) in `table`, together with the matched sign.
fn find_signed(table: &[Root], v: &[f64]) -> Option<(usize, f64)> {
    let tol = MATCH_TOL * (1.0 + norm(v));
    for (i, r) in table.iter().enumerate() {
        if norm(&sub(v, r.coords())) <= tol {
            return Some((i, 1.0));
        }
        if norm(&sub(v, &r.negated().coords)) <= tol {
            return Some((i, -1.0));
        }
    }
    None
}

/// Reflection-closure orbits of the positive roots. Two positive roots share
/// an orbit iff connected by a chain of root reflections, with negatives
/// folded back by sign flip. Labels are ordered by (squared norm, first index).
pub fn orbit_partition(positive: &[Root]) -> Result<(Vec<usize>, usize)> {
    let n = positive.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for b in positive {
            let image = reflect(positive[i].coords(), b);
            let (j, _sign) = find_signed(positive, &image).ok_or_else(|| {
                Error::InvalidSystem(format!("reflection image of positive root {i} not in system"))
            })?;
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let reps: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut classes: Vec<usize> = reps.clone();
    classes.sort_unstable();
    classes.dedup();
    // Stable orbit ids: short orbits first, ties by first occurrence.
    classes.sort_by(|&a, &b| {
        positive[a]
            .squared_norm()
            .total_cmp(&positive[b].squared_norm())
            .then(a.cmp(&b))
    });
    let labels: Vec<usize> = reps
        .iter()
        .map(|r| classes.iter().position(|c| c == r).unwrap())
        .collect();
    Ok((labels, classes.len()))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Check that a candidate set of vectors is a reduced root system: closed
/// under its own reflections, and containing no multiple of a root other
/// than its negative.
pub fn verify_root_system(candidate: &[Root]) -> Result<VerifyReport> {
    if candidate.is_empty() {
        return Err(Error::DegenerateInput("empty candidate set".into()));
    }
    let dim = candidate[0].dim();
    for r in candidate {
        if r.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.dim(),
            });
        }
    }
    let contains = |v: &[f64]| {
        let tol = MATCH_TOL * (1.0 + norm(v));
        candidate.iter().any(|r| norm(&sub(v, r.coords())) <= tol)
    };
    let mut violations = Vec::new();
    'outer: for (i, a) in candidate.iter().enumerate() {
        for (j, b) in candidate.iter().enumerate() {
            let image = reflect(b.coords(), a);
            if !contains(&image) {
                violations.push(format!(
                    "closure: reflection of root {j} by root {i} is not in the set"
                ));
                break 'outer;
            }
        }
    }
    'red: for (i, a) in candidate.iter().enumerate() {
        for (j, b) in candidate.iter().enumerate().skip(i + 1) {
            // b = c * a for some scalar c?
            let c = a.dot(b.coords()) / a.squared_norm();
            let mut resid = b.coords().to_vec();
            axpy(&mut resid, -c, a.coords());
            if norm(&resid) <= MATCH_TOL * b.norm() && (c - 1.0).abs() > 1e-9 && (c + 1.0).abs() > 1e-9
            {
                violations.push(format!(
                    "reduced: roots {i} and {j} are collinear with ratio {c}"
                ));
                break 'red;
            }
        }
    }
    Ok(VerifyReport {
        ok: violations.is_empty(),
        violations,
    })
}

/// Construct a root system from the family tables, fixing the positive side
/// with `chamber_vector` (or the deterministic default).
pub fn build_root_system(
    family: Family,
    size: usize,
    chamber_vector: Option<Vec<f64>>,
) -> Result<RootSystem> {
    let (ambient, full) = full_roots(family, size)?;
    let u = match chamber_vector {
        Some(u) => {
            if u.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    got: u.len(),
                });
            }
            check_generic(&full, &u)?;
            u
        }
        None => {
            // Deterministic perturbation retries in case some root is
            // orthogonal to the default direction.
            let mut u = default_chamber_vector(ambient);
            let mut tries = 0;
            while check_generic(&full, &u).is_err() {
                tries += 1;
                if tries > 8 {
                    return Err(Error::InvalidSystem(
                        "no generic chamber vector found after bounded retries".into(),
                    ));
                }
                for (i, ui) in u.iter_mut().enumerate() {
                    *ui += 1e-3 * tries as f64 * (i + 1) as f64;
                }
            }
            u
        }
    };
    let positive = positive_subsystem(&full, &u)?;
    let simple = simple_system(&positive)?;
    let (orbits, orbit_count) = orbit_partition(&positive)?;

    // Simple roots must be pairwise non-acute.
    for (ai, &a) in simple.iter().enumerate() {
        for &b in simple.iter().skip(ai + 1) {
            let d = positive[a].dot(positive[b].coords());
            if d > MATCH_TOL * positive[a].norm() * positive[b].norm() {
                return Err(Error::InvalidSystem(format!(
                    "simple roots {a} and {b} have positive inner product {d}"
                )));
            }
        }
    }

    let mut roots = positive.clone();
    roots.extend(positive.iter().map(Root::negated));

    let system = RootSystem {
        family,
        size,
        ambient_dim: ambient,
        roots,
        positive,
        simple,
        orbits,
        orbit_count,
        chamber_vector: u,
    };
    Ok(system)
}

/// Canonical Weyl-chamber representative of `x`: apply simple reflections
/// while some simple root has negative inner product. Each step strictly
/// increases <x,u>, so the iteration cap only trips on numerical garbage.
pub fn chamber_project(x: &[f64], system: &RootSystem) -> Result<Vec<f64>> {
    let cap = system.roots().len() * system.roots().len();
    let mut y = x.to_vec();
    for _ in 0..=cap {
        let mut worst: Option<(usize, f64)> = None;
        for &s in system.simple_indices() {
            let d = system.positive()[s].dot(&y);
            if d < 0.0 && worst.map(|(_, w)| d < w).unwrap_or(true) {
                worst = Some((s, d));
            }
        }
        match worst {
            None => return Ok(y),
            Some((s, _)) => y = reflect(&y, &system.positive()[s]),
        }
    }
    Err(Error::IterationCapExceeded { cap })
}

/// Minimum normalized distance from `x` (in the closed chamber) to any wall.
pub fn min_wall_distance(x: &[f64], system: &RootSystem) -> Result<f64> {
    let scale = 1e-9 * (1.0 + norm(x));
    let mut min = f64::INFINITY;
    for (i, r) in system.positive().iter().enumerate() {
        let d = r.dot(x) / r.norm();
        if d < -scale {
            return Err(Error::OutsideChamber {
                root_index: i,
                value: d,
            });
        }
        min = min.min(d.max(0.0));
    }
    Ok(min)
}

/// Interior point with equal height over every simple wall, scaled so the
/// minimum wall distance is exactly 1. Used as the default process start.
pub fn default_interior_point(system: &RootSystem) -> Result<Vec<f64>> {
    let rank = system.rank();
    let dim = system.ambient_dim();
    let simple: Vec<&Root> = system.simple_roots().collect();
    // x = G^T (G G^T)^{-1} 1  with G the rank x dim matrix of simple roots.
    let mut gram = vec![0.0; rank * rank];
    for i in 0..rank {
        for j in 0..rank {
            gram[i * rank + j] = simple[i].dot(simple[j].coords());
        }
    }
    let w = solve(&gram, &vec![1.0; rank], rank)?;
    let mut x = vec![0.0; dim];
    for (i, s) in simple.iter().enumerate() {
        axpy(&mut x, w[i], s.coords());
    }
    let d = min_wall_distance(&x, system)?;
    if d <= 0.0 {
        return Err(Error::InvalidSystem(
            "default interior point landed on a wall".into(),
        ));
    }
    Ok(x.iter().map(|c| c / d).collect())
}
