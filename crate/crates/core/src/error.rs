use thiserror::Error;

/// Errors surfaced by grid construction, the solvers and the stochastic layer.
///
/// Diagnostic values are carried as f64 regardless of the scalar the solver
/// runs with, so the error type stays non-generic.
#[derive(Debug, Error)]
pub enum SolverError {
    /// The density (or the transported state) does not fit the grid.
    #[error("support overflow: {what} = {value} leaves the grid range [{lo}, {hi}]")]
    SupportOverflow {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// Explicit transport step violates the CFL restriction.
    #[error("CFL violation: dt*max|b|/dx = {courant} > 1")]
    CflViolation { courant: f64 },

    /// A characteristic left the velocity truncation band.
    #[error("characteristic overflow: |V| = {v} exceeds the velocity band {band}")]
    StepOverflow { v: f64, band: f64 },

    /// The defect measure came out negative beyond tolerance, which signals
    /// a corrupted kinetic state.
    #[error("negative defect measure {value} at cell ({i}, {j}) (tolerance {tol})")]
    NegativeDefect {
        value: f64,
        i: usize,
        j: usize,
        tol: f64,
    },

    /// A constructor or configuration precondition failed.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;
