//! Flat key-value experiment configuration with command-line overrides.
//!
//! A config file holds `key = value` lines (`#` comments); every key can also
//! be set with `--set key=value`. The resolved settings are hashed (FNV-1a)
//! and the hash is embedded in every artifact so outputs are traceable to
//! their exact configuration.

use dunkl_core::algebra::MultiplicityFunction;
use dunkl_core::error::{Error, Result};
use dunkl_core::root_system::{build_root_system, Family, RootSystem};
use dunkl_core::sde::SimulationConfig;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const KNOWN_KEYS: &[&str] = &[
    "family",
    "size",
    "chamber_vector",
    "multiplicities",
    "k",
    "x0",
    "T",
    "dt",
    "epsilon_coeff",
    "theta",
    "max_substeps",
    "path_count",
    "seed",
    "threads",
    "out_dir",
];

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub family: String,
    pub size: usize,
    pub chamber_vector: Option<Vec<f64>>,
    /// Per-orbit multiplicities (orbit-id order); takes precedence over `k`.
    pub multiplicities: Option<Vec<f64>>,
    /// Uniform multiplicity shorthand.
    pub k: f64,
    pub x0: Option<Vec<f64>>,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    pub epsilon_coeff: f64,
    pub theta: f64,
    pub max_substeps: u32,
    pub path_count: usize,
    pub seed: u64,
    /// Execution detail, not experiment identity: excluded from artifacts.
    #[serde(skip)]
    pub threads: usize,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad number {s:?} in list")))
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad value {v:?} for key {key:?}")))
}

impl ExperimentConfig {
    /// Defaults, then the optional config file, then overrides, in order.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap().trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        for (k, v) in overrides {
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        for key in map.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::InvalidConfig(format!("unknown config key {key:?}")));
            }
        }

        let get = |k: &str| map.get(k).map(String::as_str);
        let cfg = ExperimentConfig {
            family: get("family").unwrap_or("A").to_string(),
            size: get("size").map(|v| parse_scalar("size", v)).transpose()?.unwrap_or(3),
            chamber_vector: get("chamber_vector").map(parse_list).transpose()?,
            multiplicities: get("multiplicities").map(parse_list).transpose()?,
            k: get("k").map(|v| parse_scalar("k", v)).transpose()?.unwrap_or(0.25),
            x0: get("x0").map(parse_list).transpose()?,
            horizon: get("T").map(|v| parse_scalar("T", v)).transpose()?.unwrap_or(1.0),
            dt: get("dt").map(|v| parse_scalar("dt", v)).transpose()?.unwrap_or(1e-4),
            epsilon_coeff: get("epsilon_coeff")
                .map(|v| parse_scalar("epsilon_coeff", v))
                .transpose()?
                .unwrap_or(1.0),
            theta: get("theta").map(|v| parse_scalar("theta", v)).transpose()?.unwrap_or(0.1),
            max_substeps: get("max_substeps")
                .map(|v| parse_scalar("max_substeps", v))
                .transpose()?
                .unwrap_or(4096),
            path_count: get("path_count")
                .map(|v| parse_scalar("path_count", v))
                .transpose()?
                .unwrap_or(8),
            seed: get("seed").map(|v| parse_scalar("seed", v)).transpose()?.unwrap_or(12345),
            threads: get("threads").map(|v| parse_scalar("threads", v)).transpose()?.unwrap_or(0),
            out_dir: PathBuf::from(get("out_dir").unwrap_or("out")),
        };
        cfg.family.parse::<Family>()?;
        Ok(cfg)
    }

    pub fn family(&self) -> Family {
        self.family.parse().expect("validated in resolve")
    }

    pub fn build_system(&self) -> Result<RootSystem> {
        build_root_system(self.family(), self.size, self.chamber_vector.clone())
    }

    pub fn multiplicity(&self, system: &RootSystem) -> Result<MultiplicityFunction> {
        match &self.multiplicities {
            Some(list) => MultiplicityFunction::new(list.clone(), system),
            None => MultiplicityFunction::uniform(self.k, system),
        }
    }

    pub fn simulation(&self) -> Result<SimulationConfig> {
        let system = self.build_system()?;
        let multiplicity = self.multiplicity(&system)?;
        let mut sim = SimulationConfig::new(system, multiplicity)?;
        if let Some(x0) = &self.x0 {
            sim.x0 = x0.clone();
        }
        sim.horizon = self.horizon;
        sim.dt = self.dt;
        sim.substep_threshold = self.theta;
        sim.max_substeps = self.max_substeps;
        sim.seed = self.seed;
        sim.path_count = self.path_count;
        sim.validate()?;
        Ok(sim)
    }

    /// Canonical settings listing, the input of the config hash.
    fn canonical(&self) -> String {
        fn list(v: &Option<Vec<f64>>) -> String {
            match v {
                Some(xs) => xs
                    .iter()
                    .map(|x| format!("{x:?}"))
                    .collect::<Vec<_>>()
                    .join(","),
                None => "-".into(),
            }
        }
        format!(
            "family={}\nsize={}\nchamber_vector={}\nmultiplicities={}\nk={:?}\nx0={}\nT={:?}\ndt={:?}\nepsilon_coeff={:?}\ntheta={:?}\nmax_substeps={}\npath_count={}\nseed={}\n",
            self.family,
            self.size,
            list(&self.chamber_vector),
            list(&self.multiplicities),
            self.k,
            list(&self.x0),
            self.horizon,
            self.dt,
            self.epsilon_coeff,
            self.theta,
            self.max_substeps,
            self.path_count,
            self.seed,
        )
    }

    /// FNV-1a 64 over the canonical listing. Deliberately excludes out_dir
    /// and threads: neither changes any computed value.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }

    /// Thread count: DUNKL_THREADS overrides the config; 0 means automatic.
    pub fn effective_threads(&self) -> usize {
        std::env::var("DUNKL_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(self.threads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = ExperimentConfig::resolve(None, &[]).unwrap();
        assert_eq!(cfg.family, "A");
        assert_eq!(cfg.size, 3);
        assert_eq!(cfg.path_count, 8);
        assert!(cfg.simulation().is_ok());
    }

    #[test]
    fn overrides_win_and_unknown_keys_fail() {
        let over = vec![("family".to_string(), "B".to_string()), ("size".to_string(), "2".to_string())];
        let cfg = ExperimentConfig::resolve(None, &over).unwrap();
        assert_eq!(cfg.family, "B");
        let bad = vec![("no_such_key".to_string(), "1".to_string())];
        assert!(ExperimentConfig::resolve(None, &bad).is_err());
    }

    #[test]
    fn file_parsing_and_hash_stability() {
        let dir = std::env::temp_dir().join("dunkl-cfg-test");
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("exp.cfg");
        std::fs::write(&file, "# experiment\nfamily = B\nsize = 2\nmultiplicities = 0.2, 0.45\ndt = 1e-3\n").unwrap();
        let a = ExperimentConfig::resolve(Some(&file), &[]).unwrap();
        let b = ExperimentConfig::resolve(Some(&file), &[]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.multiplicities, Some(vec![0.2, 0.45]));
        let c = ExperimentConfig::resolve(Some(&file), &[("seed".into(), "7".into())]).unwrap();
        assert_ne!(a.hash(), c.hash());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn invalid_multiplicity_is_config_error() {
        let over = vec![("k".to_string(), "-0.1".to_string())];
        let cfg = ExperimentConfig::resolve(None, &over).unwrap();
        assert!(cfg.simulation().is_err());
    }
}
