use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid root system: {0}")]
    InvalidSystem(String),

    #[error("family {family} requires size >= {min}, got {size}")]
    SizeBelowMinimum {
        family: String,
        size: usize,
        min: usize,
    },

    #[error("chamber vector is orthogonal to root {root_index} (|<a,u>| = {value:.3e})")]
    NonGenericChamberVector { root_index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point outside the closed Weyl chamber: <a,x> = {value:.3e} for positive root {root_index}")]
    OutsideChamber { root_index: usize, value: f64 },

    #[error("point too close to wall of positive root {root_index} (|<a,x>| = {value:.3e})")]
    WallProximity { root_index: usize, value: f64 },

    #[error("chamber projection exceeded the iteration cap of {cap}")]
    IterationCapExceeded { cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid multiplicity: {0}")]
    InvalidMultiplicity(String),

    #[error("integrator failure on path {path_index}: {detail}")]
    IntegratorFailure { path_index: u64, detail: String },

    #[error("target {target} outside the time-change range [0, {max}]")]
    TimeChangeOutOfRange { target: f64, max: f64 },

    #[error("time change is not strictly increasing at the bracketing interval {index}")]
    FlatTimeChange { index: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}
