//! Path file formats: columnar little-endian float64 `.bin` with a JSON
//! header sidecar, and CSV for small paths. Writes are byte-deterministic
//! for identical inputs.

use crate::error::Result;
use crate::sde::PathRecord;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathHeader {
    pub format: String,
    pub layout: String,
    pub dim: usize,
    pub steps: usize,
    pub dt: f64,
    pub seed: u64,
    pub path_index: u64,
    pub substep_total: u64,
    pub wall_snap_count: u64,
    pub config_hash: String,
}

fn sidecar_path(bin_path: &Path) -> PathBuf {
    let mut s = bin_path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Write `<file>.bin` (column-major: all samples of component 0, then
/// component 1, ...) plus `<file>.bin.json` describing the grid.
pub fn write_path_bin(path: &PathRecord, bin_path: &Path, config_hash: u64) -> Result<()> {
    let header = PathHeader {
        format: "dunkl-path-v1".into(),
        layout: "column-major".into(),
        dim: path.dim,
        steps: path.steps(),
        dt: path.dt,
        seed: path.seed,
        path_index: path.path_index,
        substep_total: path.substep_total,
        wall_snap_count: path.wall_snap_count,
        config_hash: format!("{config_hash:016x}"),
    };
    let samples = path.steps() + 1;
    let mut buf = Vec::with_capacity(samples * path.dim * 8);
    for c in 0..path.dim {
        for i in 0..samples {
            buf.extend_from_slice(&path.states[i * path.dim + c].to_le_bytes());
        }
    }
    std::fs::write(bin_path, &buf)?;
    let mut json = serde_json::to_vec_pretty(&header)?;
    json.push(b'\n');
    std::fs::write(sidecar_path(bin_path), json)?;
    Ok(())
}

/// Read a `.bin` written by [`write_path_bin`], using its sidecar header.
pub fn read_path_bin(bin_path: &Path) -> Result<PathRecord> {
    let header: PathHeader =
        serde_json::from_slice(&std::fs::read(sidecar_path(bin_path))?)?;
    let raw = std::fs::read(bin_path)?;
    let samples = header.steps + 1;
    if raw.len() != samples * header.dim * 8 {
        return Err(crate::error::Error::DegenerateInput(format!(
            "path file size {} does not match header ({} samples x {} components)",
            raw.len(),
            samples,
            header.dim
        )));
    }
    let mut states = vec![0.0f64; samples * header.dim];
    for c in 0..header.dim {
        for i in 0..samples {
            let off = (c * samples + i) * 8;
            let v = f64::from_le_bytes(raw[off..off + 8].try_into().unwrap());
            states[i * header.dim + c] = v;
        }
    }
    Ok(PathRecord {
        dim: header.dim,
        dt: header.dt,
        states,
        seed: header.seed,
        path_index: header.path_index,
        substep_total: header.substep_total,
        wall_snap_count: header.wall_snap_count,
    })
}

/// CSV export: header `t,x0,...`, one row per grid point, full precision.
pub fn write_path_csv(path: &PathRecord, csv_path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
    write!(f, "t")?;
    for c in 0..path.dim {
        write!(f, ",x{c}")?;
    }
    writeln!(f)?;
    for i in 0..=path.steps() {
        write!(f, "{:?}", path.time(i))?;
        for v in path.state(i) {
            write!(f, ",{v:?}")?;
        }
        writeln!(f)?;
    }
    f.flush()?;
    Ok(())
}
