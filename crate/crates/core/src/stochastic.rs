//! Transport noise: seeded Wiener paths, the integrated shift M(t), the
//! random-translation construction of the stochastic solution and a direct
//! per-step noise-advection scheme kept for cross-validation, plus the
//! Monte-Carlo ensemble driver.

use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SolverError};
use crate::kinetic::DensityField;
use crate::model::NoiseModel;
use crate::scalar::{lit, Real};
use crate::solver::{
    run_with_step_shifts, shift_density, shift_kinetic_in_place, SolverConfig, Trajectory,
};

/// Sampled standard Wiener path on a uniform time grid, reproducible from
/// (seed, dt, n).
#[derive(Debug, Clone)]
pub struct WienerPath<R> {
    pub seed: u64,
    pub dt: R,
    /// W(t_k) for k = 0..=n, W(0) = 0.
    pub samples: Vec<R>,
}

impl<R: Real> WienerPath<R>
where
    StandardNormal: Distribution<R>,
{
    pub fn sample(seed: u64, dt: R, n_steps: usize) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let scale = dt.sqrt();
        let mut samples = Vec::with_capacity(n_steps + 1);
        samples.push(R::zero());
        let mut w = R::zero();
        for _ in 0..n_steps {
            let g: R = StandardNormal.sample(&mut rng);
            w = w + scale * g;
            samples.push(w);
        }
        Self { seed, dt, samples }
    }
}

/// Wiener path together with the integrated shift
/// `M(t_k) = sum_l sigma(t_l) (W(t_{l+1}) - W(t_l))`.
///
/// Left-point sums: with deterministic sigma the Ito and Stratonovich
/// integrals coincide (the quadratic covariation of sigma with W vanishes),
/// so no midpoint correction appears.
#[derive(Debug, Clone)]
pub struct ShiftPath<R> {
    pub wiener: WienerPath<R>,
    pub shift: Vec<R>,
}

impl<R: Real> ShiftPath<R> {
    /// M at path index k.
    #[inline]
    pub fn at(&self, k: usize) -> R {
        self.shift[k]
    }

    pub fn max_abs(&self) -> R {
        self.shift.iter().fold(R::zero(), |m, v| m.max(v.abs()))
    }

    /// Per-step increments M(t_{k+1}) - M(t_k).
    pub fn increments(&self) -> Vec<R> {
        self.shift.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Sample a shift path aligned with the solver time grid.
pub fn sample_shift<R: Real>(
    noise: &NoiseModel<R>,
    seed: u64,
    dt_path: R,
    t_final: R,
) -> Result<ShiftPath<R>>
where
    StandardNormal: Distribution<R>,
{
    if !(dt_path > R::zero()) {
        return Err(SolverError::InvalidConfig("dt_path must be positive".into()));
    }
    let ratio = t_final / dt_path;
    let n = ratio.round().to_usize().unwrap_or(0);
    if n == 0 || (ratio - R::from_usize(n).unwrap()).abs() > lit(1e-9) {
        return Err(SolverError::InvalidConfig(format!(
            "dt_path must divide t_final, got {dt_path} vs {t_final}"
        )));
    }
    let wiener = WienerPath::sample(seed, dt_path, n);
    let mut shift = Vec::with_capacity(n + 1);
    shift.push(R::zero());
    let mut m = R::zero();
    for l in 0..n {
        let t_l = dt_path * R::from_usize(l).unwrap();
        m = m + noise.sigma_at(t_l) * (wiener.samples[l + 1] - wiener.samples[l]);
        shift.push(m);
    }
    Ok(ShiftPath { wiener, shift })
}

/// Translate every snapshot of a deterministic trajectory by M(t_k): the
/// pathwise stochastic solution by construction. The path grid must match
/// the solver step so snapshot indices line up.
pub fn shift_trajectory<R: Real>(det: &Trajectory<R>, shift: &ShiftPath<R>) -> Result<Trajectory<R>> {
    let mut out = det.clone();
    for snap in &mut out.snapshots {
        if snap.step >= shift.shift.len() {
            return Err(SolverError::InvalidConfig(
                "shift path shorter than trajectory".into(),
            ));
        }
        let delta = shift.at(snap.step);
        let mass_before = snap.density.mass();
        snap.density = shift_density(&snap.density, delta);
        if (snap.density.mass() - mass_before).abs()
            > lit::<R>(1e-9) * mass_before.abs().max(R::one())
        {
            return Err(SolverError::SupportOverflow {
                what: "shifted support",
                value: delta.to_f64().unwrap_or(f64::NAN),
                lo: snap.density.grid.x_min.to_f64().unwrap_or(f64::NAN),
                hi: snap.density.grid.x_max.to_f64().unwrap_or(f64::NAN),
            });
        }
        if let Some(u) = &mut snap.kinetic {
            shift_kinetic_in_place(u, delta)?;
        }
        // defect fields are x-translated the same way; drop them rather than
        // interpolate, the deterministic run already certified them
        snap.defect = None;
    }
    // norms are translation invariant up to the interpolation applied above;
    // keep the recomputed values
    for (row, snap) in out.diagnostics.iter_mut().zip(&out.snapshots) {
        row.mass = snap.density.mass();
        row.l1 = snap.density.l1_norm();
        row.linf = snap.density.linf_norm();
    }
    Ok(out)
}

/// Solve one path with the random-translation construction: one
/// deterministic solve, then every snapshot evaluated at x - M(t).
pub fn solve_pathwise_shift<R: Real>(
    config: &SolverConfig<R>,
    rho0: &DensityField<R>,
    shift: &ShiftPath<R>,
) -> Result<Trajectory<R>> {
    let det = config.run(rho0)?;
    shift_trajectory(&det, shift)
}

/// Solve one path by advecting the state by the noise increment after every
/// deterministic step (the cross-validation discretization).
pub fn solve_pathwise_direct<R: Real>(
    config: &SolverConfig<R>,
    rho0: &DensityField<R>,
    shift: &ShiftPath<R>,
) -> Result<Trajectory<R>> {
    let (_, n_steps) = config.time_steps()?;
    let incs = shift.increments();
    if incs.len() != n_steps {
        return Err(SolverError::InvalidConfig(format!(
            "shift path has {} increments, solver takes {} steps",
            incs.len(),
            n_steps
        )));
    }
    run_with_step_shifts(config, rho0, Some(&incs))
}

/// Per-snapshot ensemble statistics, deterministic in (base_seed, n_paths).
#[derive(Debug, Clone)]
pub struct EnsembleStats<R> {
    pub n_paths: usize,
    pub times: Vec<R>,
    pub mean: Vec<DensityField<R>>,
    pub variance: Vec<DensityField<R>>,
    pub mean_l1: Vec<R>,
    pub mean_linf: Vec<R>,
    /// Least-squares slope of log L1 norm against t over positive times.
    pub exp_fit_rate: Option<R>,
}

/// Monte-Carlo driver over independent shift paths; path k draws from seed
/// `base_seed + k` and reuses the single cached deterministic trajectory.
pub fn ensemble<R: Real>(
    config: &SolverConfig<R>,
    rho0: &DensityField<R>,
    noise: &NoiseModel<R>,
    n_paths: usize,
    base_seed: u64,
) -> Result<EnsembleStats<R>>
where
    StandardNormal: Distribution<R>,
{
    if n_paths == 0 {
        return Err(SolverError::InvalidConfig("n_paths must be >= 1".into()));
    }
    let det = config.run(rho0)?;
    let (dt, _) = config.time_steps()?;
    let n_snap = det.snapshots.len();
    let nx = config.xgrid.n_cells;
    let mut mean = vec![vec![R::zero(); nx]; n_snap];
    let mut m2 = vec![vec![R::zero(); nx]; n_snap];
    let mut mean_l1 = vec![R::zero(); n_snap];
    let mut mean_linf = vec![R::zero(); n_snap];
    for k in 0..n_paths {
        let path = sample_shift(noise, base_seed + k as u64, dt, config.t_final)?;
        let traj = shift_trajectory(&det, &path)?;
        let count = R::from_usize(k + 1).unwrap();
        for (s, snap) in traj.snapshots.iter().enumerate() {
            for (i, &v) in snap.density.values.iter().enumerate() {
                // Welford update in fixed path order
                let d = v - mean[s][i];
                mean[s][i] = mean[s][i] + d / count;
                m2[s][i] = m2[s][i] + d * (v - mean[s][i]);
            }
            mean_l1[s] = mean_l1[s] + (snap.density.l1_norm() - mean_l1[s]) / count;
            mean_linf[s] = mean_linf[s] + (snap.density.linf_norm() - mean_linf[s]) / count;
        }
    }
    let denom = R::from_usize(n_paths.max(2) - 1).unwrap();
    let times: Vec<R> = det.snapshots.iter().map(|s| s.t).collect();
    let mean_fields: Vec<_> = mean
        .into_iter()
        .map(|v| DensityField::new(config.xgrid, v))
        .collect();
    let var_fields: Vec<_> = m2
        .into_iter()
        .map(|v| {
            DensityField::new(
                config.xgrid,
                v.into_iter().map(|x| (x / denom).max(R::zero())).collect(),
            )
        })
        .collect();
    let exp_fit_rate = fit_log_slope(&times, &mean_l1);
    Ok(EnsembleStats {
        n_paths,
        times,
        mean: mean_fields,
        variance: var_fields,
        mean_l1,
        mean_linf,
        exp_fit_rate,
    })
}

fn fit_log_slope<R: Real>(times: &[R], norms: &[R]) -> Option<R> {
    let pts: Vec<(R, R)> = times
        .iter()
        .zip(norms)
        .filter(|(&t, &n)| t > R::zero() && n > R::zero())
        .map(|(&t, &n)| (t, n.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = R::from_usize(pts.len()).unwrap();
    let sx: R = pts.iter().map(|p| p.0).sum();
    let sy: R = pts.iter().map(|p| p.1).sum();
    let sxx: R = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: R = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == R::zero() {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}
