//! Experiment configuration: TOML schema, command-line overrides and the
//! translation into solver objects.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use sbl_core::{
    DensityField64, FluxModel64, ForcingModel64, NoiseModel64, SolverConfig64, SpaceGrid64,
    VelocityGrid64,
};

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub model: ModelSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub initial: InitialSection,
    pub stochastic: Option<StochasticSection>,
    pub checks: Option<ChecksSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub flux: String,
    #[serde(default = "zero_spec")]
    pub forcing: String,
    #[serde(default = "zero_spec")]
    pub noise: String,
}

fn zero_spec() -> String {
    "zero".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub n_v: usize,
    /// Half-width of the velocity band; sized from the data when absent.
    pub v_band: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub eps: f64,
    pub t_final: f64,
    pub dt: Option<f64>,
    pub cfl: Option<f64>,
    pub record_every: Option<usize>,
    pub char_substeps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub profile: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticSection {
    #[serde(default = "shift_spec")]
    pub mode: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
}

fn shift_spec() -> String {
    "shift".into()
}

fn default_paths() -> usize {
    100
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    /// Admissible [lo, hi] interval for every emitted density value.
    pub bounds: Option<[f64; 2]>,
    #[serde(default = "default_check_tol")]
    pub tol: f64,
}

fn default_check_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Deterministic,
    Shift,
    Direct,
    Ensemble,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Deterministic => "deterministic",
            Mode::Shift => "shift",
            Mode::Direct => "direct",
            Mode::Ensemble => "ensemble",
        }
    }
}

/// Parsed config plus the canonical text it was built from.
pub struct Loaded {
    pub exp: ExperimentConfig,
    pub canonical: String,
    pub hash: String,
}

/// Solver-side objects assembled from a parsed config.
pub struct Built {
    pub solver: SolverConfig64,
    pub rho0: DensityField64,
    pub noise: NoiseModel64,
    pub mode: Mode,
    pub seed: u64,
    pub n_paths: usize,
}

/// Read the config file, fold in `--set` / `--seed` overrides, and fix the
/// canonical form that gets hashed into the manifest.
pub fn load(path: &Path, seed: Option<u64>, sets: &[String]) -> Result<Loaded> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for s in sets {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got '{s}'")))?;
        apply_override(&mut table, key.trim(), parse_scalar(raw.trim()))?;
    }
    if let Some(seed) = seed {
        apply_override(&mut table, "stochastic.seed", toml::Value::Integer(seed as i64))?;
    }
    let canonical = toml::to_string(&table)
        .map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))?;
    let hash = format!("{:x}", Sha256::digest(canonical.as_bytes()));
    let exp: ExperimentConfig = table
        .try_into()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Loaded { exp, canonical, hash })
}

fn parse_scalar(raw: &str) -> toml::Value {
    // reuse the TOML value grammar; anything that does not parse is a string
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad override key '{key}'")));
    }
    let mut current = root;
    for part in &parts[..parts.len() - 1] {
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                CliError::Config(format!("override '{key}': '{part}' is not a table"))
            })?;
    }
    current.insert(parts.last().unwrap().to_string(), value);
    Ok(())
}

impl ExperimentConfig {
    pub fn build(&self) -> Result<Built> {
        if !(self.solver.eps > 0.0) {
            return Err(CliError::Config(format!(
                "solver.eps must be positive, got {}",
                self.solver.eps
            )));
        }
        if !(self.solver.t_final > 0.0) {
            return Err(CliError::Config(format!(
                "solver.t_final must be positive, got {}",
                self.solver.t_final
            )));
        }

        let flux = FluxModel64::from_spec(&self.model.flux)
            .map_err(|e| CliError::Config(format!("model.flux: {e}")))?;
        let forcing = ForcingModel64::from_spec(&self.model.forcing)
            .map_err(|e| CliError::Config(format!("model.forcing: {e}")))?;
        let noise = NoiseModel64::from_spec(&self.model.noise)
            .map_err(|e| CliError::Config(format!("model.noise: {e}")))?;

        let xgrid = SpaceGrid64::new(self.grid.x_min, self.grid.x_max, self.grid.n_x)
            .map_err(|e| CliError::Config(format!("grid: {e}")))?;
        let rho0 = initial_profile(&self.initial.profile, xgrid)?;

        let vgrid = match self.grid.v_band {
            Some(band) => {
                if !(band > 0.0) {
                    return Err(CliError::Config(format!(
                        "grid.v_band must be positive, got {band}"
                    )));
                }
                VelocityGrid64::new(-band, band, self.grid.n_v)
                    .map_err(|e| CliError::Config(format!("grid: {e}")))?
            }
            None => {
                let reach = rho0.linf_norm().max(1e-3) * 1.25;
                let growth = forcing.band_exponent(self.solver.t_final, 128);
                VelocityGrid64::for_support(reach, growth, self.grid.n_v)
                    .map_err(|e| CliError::Config(format!("grid: {e}")))?
            }
        };

        let mut solver = SolverConfig64::new(
            flux,
            forcing,
            xgrid,
            vgrid,
            self.solver.eps,
            self.solver.t_final,
        );
        solver.dt = self.solver.dt;
        if let Some(cfl) = self.solver.cfl {
            solver.cfl_target = cfl;
        }
        if let Some(every) = self.solver.record_every {
            solver.record_every = every.max(1);
        }
        if let Some(n) = self.solver.char_substeps {
            solver.char_substeps = n.max(1);
        }
        solver
            .validate()
            .map_err(|e| CliError::Config(format!("solver: {e}")))?;

        let (mode, seed, n_paths) = match &self.stochastic {
            None => (Mode::Deterministic, 0, 1),
            Some(s) => {
                let mode = match s.mode.as_str() {
                    "shift" => Mode::Shift,
                    "direct" => Mode::Direct,
                    "ensemble" => Mode::Ensemble,
                    other => {
                        return Err(CliError::Config(format!(
                            "stochastic.mode must be shift, direct or ensemble, got '{other}'"
                        )))
                    }
                };
                if mode == Mode::Ensemble && s.n_paths == 0 {
                    return Err(CliError::Config(
                        "stochastic.n_paths must be at least 1".into(),
                    ));
                }
                (mode, s.seed, s.n_paths)
            }
        };

        Ok(Built {
            solver,
            rho0,
            noise,
            mode,
            seed,
            n_paths,
        })
    }
}

/// Named initial profiles.
///
/// `riemann:l=..,r=..,x0=..` truncates both states to a compact window
/// (optional `xl`/`xr`, default 5% inside the domain) so the data stays
/// admissible for the zero-boundary solver. `bump:center=..,width=..,height=..`
/// is a C1 quartic bump. `file:PATH` reads one cell value per line.
fn initial_profile(spec: &str, grid: SpaceGrid64) -> Result<DensityField64> {
    let (head, body) = match spec.split_once(':') {
        Some((h, b)) => (h, b),
        None => (spec, ""),
    };
    let err = |msg: String| CliError::Config(format!("initial.profile '{spec}': {msg}"));
    match head {
        "riemann" => {
            let kv = parse_kv(body).map_err(err)?;
            let l = *kv_get(&kv, "l").ok_or_else(|| err("missing 'l'".into()))?;
            let r = *kv_get(&kv, "r").ok_or_else(|| err("missing 'r'".into()))?;
            let x0 = *kv_get(&kv, "x0").ok_or_else(|| err("missing 'x0'".into()))?;
            let margin = 0.05 * (grid.x_max - grid.x_min);
            let xl = kv_get(&kv, "xl").copied().unwrap_or(grid.x_min + margin);
            let xr = kv_get(&kv, "xr").copied().unwrap_or(grid.x_max - margin);
            Ok(DensityField64::from_fn(grid, move |x| {
                if x < xl || x >= xr {
                    0.0
                } else if x < x0 {
                    l
                } else {
                    r
                }
            }))
        }
        "bump" => {
            let kv = parse_kv(body).map_err(err)?;
            let center = *kv_get(&kv, "center").ok_or_else(|| err("missing 'center'".into()))?;
            let width = *kv_get(&kv, "width").ok_or_else(|| err("missing 'width'".into()))?;
            let height = *kv_get(&kv, "height").ok_or_else(|| err("missing 'height'".into()))?;
            if !(width > 0.0) {
                return Err(err(format!("width must be positive, got {width}")));
            }
            Ok(DensityField64::from_fn(grid, move |x| {
                let s = (x - center) / width;
                if s.abs() < 1.0 {
                    height * (1.0 - s * s).powi(2)
                } else {
                    0.0
                }
            }))
        }
        "file" => {
            let text = fs::read_to_string(body)
                .map_err(|e| err(format!("cannot read '{body}': {e}")))?;
            let values: std::result::Result<Vec<f64>, _> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::parse::<f64>)
                .collect();
            let values = values.map_err(|e| err(format!("bad value in '{body}': {e}")))?;
            if values.len() != grid.n_cells {
                return Err(err(format!(
                    "'{body}' holds {} values, grid.n_x is {}",
                    values.len(),
                    grid.n_cells
                )));
            }
            Ok(DensityField64::new(grid, values))
        }
        _ => Err(err("expected riemann:, bump: or file:".into())),
    }
}

fn parse_kv(body: &str) -> std::result::Result<Vec<(String, f64)>, String> {
    let mut out = Vec::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got '{part}'"))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| format!("bad number for '{}'", k.trim()))?;
        out.push((k.trim().to_string(), value));
    }
    Ok(out)
}

fn kv_get<'a>(kv: &'a [(String, f64)], key: &str) -> Option<&'a f64> {
    kv.iter().find(|(k, _)| k == key).map(|(_, v)| v)
}
