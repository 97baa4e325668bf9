//! Counter-based noise driver.
//!
//! Every Gaussian increment is a pure function of
//! (seed, path_index, step, depth, branch, component), so paths can be
//! generated in any order on any number of threads and coupled simulations
//! see bit-identical noise decompositions. Refined sub-increments for an
//! adaptively split macro step live on their own (depth, branch) lane.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a sequence of words into one well-scrambled key.
pub fn mix(words: &[u64]) -> u64 {
    let mut s: u64 = 0x243F_6A88_85A3_08D3; // pi fraction, arbitrary non-zero start
    for &w in words {
        s = finalize(s.wrapping_add(GOLDEN) ^ w);
    }
    finalize(s.wrapping_add(GOLDEN))
}

/// Uniform in (0, 1), 53-bit resolution, never exactly 0 or 1.
#[inline]
fn uniform_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Standard normal draw derived from a single key (Box-Muller, cosine branch).
#[inline]
pub fn standard_normal(key: u64) -> f64 {
    let u1 = uniform_open(finalize(key ^ 0x5851_F42D_4C95_7F2D));
    let u2 = uniform_open(finalize(key ^ 0x1405_7B7E_F767_814F));
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Standard-normal increment vector on a refinement lane of the driver.
pub fn gaussian_refined(
    seed: u64,
    path_index: u64,
    step: u64,
    depth: u32,
    branch: u64,
    dim: usize,
) -> Vec<f64> {
    (0..dim as u64)
        .map(|c| standard_normal(mix(&[seed, path_index, step, depth as u64, branch, c])))
        .collect()
}

/// Macro-grid increment vector (depth 0, branch 0).
pub fn gaussian_driver(seed: u64, path_index: u64, step: u64, dim: usize) -> Vec<f64> {
    gaussian_refined(seed, path_index, step, 0, 0, dim)
}
