//! Characteristic ODE system of the kinetic transport operator:
//! dX/dt = b(V), dV/dt = A(t, V), with the velocity Jacobian
//! J = exp(int dA/dv(r, V(r)) dr) integrated alongside.

use crate::error::{Result, SolverError};
use crate::model::{FluxModel, ForcingModel};
use crate::scalar::{lit, Real};

/// Endpoint of a characteristic: space and velocity position plus the
/// accumulated velocity Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowResult<R> {
    pub x: R,
    pub v: R,
    pub jacobian: R,
}

/// Fixed-substep classical Runge-Kutta integrator for the characteristic
/// system. Fixed substeps keep runs bit-reproducible.
pub struct CharacteristicIntegrator<'a, R> {
    pub flux: &'a FluxModel<R>,
    pub forcing: &'a ForcingModel<R>,
    /// Upper bound on each internal step length.
    pub substep: R,
    /// Characteristics must stay inside |V| <= v_band.
    pub v_band: R,
}

impl<'a, R: Real> CharacteristicIntegrator<'a, R> {
    pub fn new(flux: &'a FluxModel<R>, forcing: &'a ForcingModel<R>, substep: R, v_band: R) -> Self {
        assert!(substep > R::zero());
        Self {
            flux,
            forcing,
            substep,
            v_band,
        }
    }

    /// Forward flow map over [s, t] starting from (x, v) at time s.
    pub fn flow(&self, s: R, t: R, x: R, v: R) -> Result<FlowResult<R>> {
        debug_assert!(s <= t);
        self.advance(s, t, x, v)
    }

    /// Backward solve from time t down to s: the inverse of `flow(s, t)`.
    pub fn inverse_flow(&self, s: R, t: R, x: R, v: R) -> Result<FlowResult<R>> {
        debug_assert!(s <= t);
        self.advance(t, s, x, v)
    }

    /// Velocity component only; x does not feed back into (V, J).
    pub fn velocity_flow(&self, t0: R, t1: R, v: R) -> Result<(R, R)> {
        let r = self.advance(t0, t1, R::zero(), v)?;
        Ok((r.v, r.jacobian))
    }

    /// Integrate from t0 to t1 (either direction). State: (X, V, L) with
    /// L = int dA/dv along the path, so J = exp(L) for forward runs and
    /// exp(-L)... sign handled by the signed integration itself.
    fn advance(&self, t0: R, t1: R, x: R, v: R) -> Result<FlowResult<R>> {
        if self.forcing.is_zero {
            // exact: V frozen, X moves with constant speed b(v)
            return Ok(FlowResult {
                x: x + self.flux.speed_at(v) * (t1 - t0),
                v,
                jacobian: R::one(),
            });
        }
        let span = (t1 - t0).abs();
        if span == R::zero() {
            return Ok(FlowResult {
                x,
                v,
                jacobian: R::one(),
            });
        }
        let n = (span / self.substep).ceil().to_usize().unwrap_or(1).max(1);
        let h = (t1 - t0) / R::from_usize(n).unwrap();
        let half = h * lit(0.5);
        let sixth = h / lit(6.0);
        let two = lit::<R>(2.0);
        let mut state = (x, v, R::zero());
        let mut t = t0;
        let rhs = |t: R, s: (R, R, R)| -> (R, R, R) {
            (
                self.flux.speed_at(s.1),
                self.forcing.a_at(t, s.1),
                self.forcing.dva_at(t, s.1),
            )
        };
        for k in 0..n {
            let t_mid = t + half;
            let t_end = t0 + h * R::from_usize(k + 1).unwrap();
            let k1 = rhs(t, state);
            let k2 = rhs(t_mid, add(state, k1, half));
            let k3 = rhs(t_mid, add(state, k2, half));
            let k4 = rhs(t_end, add(state, k3, h));
            state = (
                state.0 + sixth * (k1.0 + two * k2.0 + two * k3.0 + k4.0),
                state.1 + sixth * (k1.1 + two * k2.1 + two * k3.1 + k4.1),
                state.2 + sixth * (k1.2 + two * k2.2 + two * k3.2 + k4.2),
            );
            t = t_end;
            if state.1.abs() > self.v_band {
                return Err(SolverError::StepOverflow {
                    v: state.1.to_f64().unwrap_or(f64::NAN),
                    band: self.v_band.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(FlowResult {
            x: state.0,
            v: state.1,
            jacobian: state.2.exp(),
        })
    }
}

#[inline]
fn add<R: Real>(s: (R, R, R), k: (R, R, R), h: R) -> (R, R, R) {
    (s.0 + k.0 * h, s.1 + k.1 * h, s.2 + k.2 * h)
}
