//! Simulation and verification toolkit for multivariate Bessel (radial
//! Dunkl) processes: root-system construction, the singular-drift SDE in the
//! Weyl chamber, exact squared-Bessel reference sampling, the random time
//! change, box-counting dimension estimation of boundary-collision times,
//! and the statistical checks tying them together.

pub mod algebra;
pub mod error;
pub mod fractal;
pub mod linalg;
pub mod pathio;
pub mod rng;
pub mod root_system;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};
