//! Artifact emission. All numeric formatting goes through the shortest
//! round-trip float representation, so identical runs produce identical
//! bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use sbl_core::{EnsembleStats64, Trajectory64};

use crate::error::Result;

pub fn write_snapshots(path: &Path, traj: &Trajectory64) -> Result<()> {
    let mut out = String::from("t,x,rho\n");
    for snap in &traj.snapshots {
        let grid = snap.density.grid;
        for (i, v) in snap.density.values.iter().enumerate() {
            let x = grid.center(i);
            out.push_str(&format!("{},{},{}\n", snap.t, x, v));
        }
    }
    write_atomic(path, out.as_bytes())
}

pub fn write_norms(path: &Path, traj: &Trajectory64) -> Result<()> {
    let mut out = String::from("t,mass,l1,linf,total_defect\n");
    for row in &traj.diagnostics {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.t, row.mass, row.l1, row.linf, row.total_defect
        ));
    }
    write_atomic(path, out.as_bytes())
}

pub fn write_ensemble_mean(path: &Path, stats: &EnsembleStats64) -> Result<()> {
    let mut out = String::from("t,x,mean,variance\n");
    for ((t, mean), var) in stats.times.iter().zip(&stats.mean).zip(&stats.variance) {
        let grid = mean.grid;
        for (i, (m, v)) in mean.values.iter().zip(&var.values).enumerate() {
            out.push_str(&format!("{},{},{},{}\n", t, grid.center(i), m, v));
        }
    }
    write_atomic(path, out.as_bytes())
}

pub fn write_ensemble_norms(path: &Path, stats: &EnsembleStats64) -> Result<()> {
    let mut out = String::from("t,mean_l1,mean_linf\n");
    for ((t, l1), linf) in stats.times.iter().zip(&stats.mean_l1).zip(&stats.mean_linf) {
        out.push_str(&format!("{},{},{}\n", t, l1, linf));
    }
    write_atomic(path, out.as_bytes())
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub schema: u32,
    pub name: &'a str,
    pub version: &'a str,
    pub config_hash: &'a str,
    pub mode: &'a str,
    pub seed: u64,
    pub n_paths: usize,
    /// Full resolved configuration, sufficient to reproduce the run.
    pub config: &'a str,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(bytes)?;
    Ok(())
}
