//! Kinetic BGK relaxation solver for scalar balance laws in one space
//! dimension, with Lipschitz flux, a velocity forcing term and Stratonovich
//! transport noise handled pathwise through a random spatial shift.
//!
//! The crate is generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); the aliases at the root pin the common `f64` stack.

pub mod error;
pub mod flow;
pub mod grid;
pub mod kinetic;
pub mod model;
pub mod scalar;
pub mod solver;
pub mod stochastic;
pub mod verify;

pub use error::{Result, SolverError};
pub use scalar::{lit, Real};

pub use flow::{CharacteristicIntegrator, FlowResult};
pub use grid::{SpaceGrid, VelocityGrid};
pub use kinetic::{
    chi, chi_cell_average, chi_positive_distance, defect_measure, defect_measure_with_tol,
    project_density, reconstruct_density, DefectField, DensityField, KineticField,
    DEFAULT_DEFECT_TOL,
};
pub use model::{FluxModel, ForcingModel, NoiseModel};
pub use solver::{
    picard_map, sequence_distance, shift_density, step_forcing, step_relax, step_transport,
    DiagnosticRow, Snapshot, SolverConfig, Trajectory,
};
pub use stochastic::{
    ensemble, sample_shift, shift_trajectory, solve_pathwise_direct, solve_pathwise_shift,
    EnsembleStats, ShiftPath, WienerPath,
};
pub use verify::{
    bump_battery, calibrate_entropy_tol, check_comparison, check_contraction_pair,
    check_decay_envelope, check_kinetic_contraction, check_linf_bound, convergence_study,
    decay_slope, entropy_battery, entropy_residuals, godunov_flux, godunov_reference,
    kruzkov_constants, restrict_density, BoundReport, Bump, ConvergenceReport, EntropyReport,
};

/// Default-precision aliases.
pub type SpaceGrid64 = SpaceGrid<f64>;
pub type VelocityGrid64 = VelocityGrid<f64>;
pub type DensityField64 = DensityField<f64>;
pub type KineticField64 = KineticField<f64>;
pub type DefectField64 = DefectField<f64>;
pub type FluxModel64 = FluxModel<f64>;
pub type ForcingModel64 = ForcingModel<f64>;
pub type NoiseModel64 = NoiseModel<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type ShiftPath64 = ShiftPath<f64>;
pub type EnsembleStats64 = EnsembleStats<f64>;

/// Single-precision aliases for memory-bound sweeps.
pub type DensityField32 = DensityField<f32>;
pub type KineticField32 = KineticField<f32>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type Trajectory32 = Trajectory<f32>;
