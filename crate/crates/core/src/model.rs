//! Catalog of problem data: flux functions, forcing terms and noise
//! intensities, plus the string identifiers the CLI addresses them by.

use std::sync::Arc;

use crate::error::{Result, SolverError};
use crate::scalar::{lit, Real};

type Fn1<R> = Arc<dyn Fn(R) -> R + Send + Sync>;
type Fn2<R> = Arc<dyn Fn(R, R) -> R + Send + Sync>;

/// Flux `B` together with its derivative `b = B'`, the kinetic transport
/// speed.
#[derive(Clone)]
pub struct FluxModel<R> {
    pub name: String,
    flux: Fn1<R>,
    speed: Fn1<R>,
    /// Range over which the model declares itself C1.
    pub range: (R, R),
}

impl<R: Real> FluxModel<R> {
    pub fn new(name: impl Into<String>, range: (R, R), flux: Fn1<R>, speed: Fn1<R>) -> Self {
        Self {
            name: name.into(),
            flux,
            speed,
            range,
        }
    }

    /// B(rho)
    #[inline]
    pub fn flux_at(&self, rho: R) -> R {
        (self.flux)(rho)
    }

    /// b(rho) = B'(rho)
    #[inline]
    pub fn speed_at(&self, rho: R) -> R {
        (self.speed)(rho)
    }

    pub fn burgers() -> Self {
        Self::new(
            "burgers",
            (lit(-4.0), lit(4.0)),
            Arc::new(|r: R| r * r / lit(2.0)),
            Arc::new(|r: R| r),
        )
    }

    pub fn linear(c: R) -> Self {
        Self::new(
            format!("linear:c={c}"),
            (lit(-4.0), lit(4.0)),
            Arc::new(move |r: R| c * r),
            Arc::new(move |_| c),
        )
    }

    /// S-shaped two-phase fractional flow, clamped to its physical range:
    /// 0 below rho = 0, `rho^2 / (rho^2 + (1 - rho)^2)` on [0, 1], 1 above.
    pub fn buckley_leverett() -> Self {
        let flux = |r: R| {
            if r < R::zero() {
                R::zero()
            } else if r > R::one() {
                R::one()
            } else {
                let den = r * r + (R::one() - r) * (R::one() - r);
                r * r / den
            }
        };
        let speed = |r: R| {
            if r <= R::zero() || r >= R::one() {
                R::zero()
            } else {
                let den = r * r + (R::one() - r) * (R::one() - r);
                lit::<R>(2.0) * r * (R::one() - r) / (den * den)
            }
        };
        Self::new(
            "buckley_leverett",
            (lit(-1.0), lit(2.0)),
            Arc::new(flux),
            Arc::new(speed),
        )
    }

    /// Parse a catalog identifier: `burgers`, `linear:c=<v>`,
    /// `buckley_leverett`, `zero`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (head, params) = split_spec(spec);
        match head {
            "burgers" => Ok(Self::burgers()),
            "buckley_leverett" => Ok(Self::buckley_leverett()),
            "zero" => Ok(Self::linear(R::zero())),
            "linear" => Ok(Self::linear(param(&params, "c", spec)?)),
            _ => Err(SolverError::InvalidConfig(format!(
                "unknown flux model '{spec}'"
            ))),
        }
    }
}

/// Forcing `A(t, v)` with its analytic v-derivative and the envelopes the
/// a-priori bounds are phrased with.
#[derive(Clone)]
pub struct ForcingModel<R> {
    pub name: String,
    a: Fn2<R>,
    dva: Fn2<R>,
    sup_dva_plus: Fn1<R>,
    sup_dva_abs: Fn1<R>,
    pub is_zero: bool,
}

impl<R: Real> ForcingModel<R> {
    /// A(t, v)
    #[inline]
    pub fn a_at(&self, t: R, v: R) -> R {
        (self.a)(t, v)
    }

    /// dA/dv(t, v)
    #[inline]
    pub fn dva_at(&self, t: R, v: R) -> R {
        (self.dva)(t, v)
    }

    /// `||[dA/dv(t, .)]^+||_inf`, the growth rate in the comparison bounds.
    #[inline]
    pub fn sup_dva_plus(&self, t: R) -> R {
        (self.sup_dva_plus)(t)
    }

    /// `||dA/dv(t, .)||_inf`, the rate governing support growth in v.
    #[inline]
    pub fn sup_dva_abs(&self, t: R) -> R {
        (self.sup_dva_abs)(t)
    }

    /// Trapezoid quadrature of `sup_dva_plus` over [0, t].
    pub fn growth_exponent(&self, t: R, n: usize) -> R {
        trapezoid(|s| self.sup_dva_plus(s), t, n)
    }

    /// Trapezoid quadrature of `sup_dva_abs` over [0, t].
    pub fn band_exponent(&self, t: R, n: usize) -> R {
        trapezoid(|s| self.sup_dva_abs(s), t, n)
    }

    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            a: Arc::new(|_, _| R::zero()),
            dva: Arc::new(|_, _| R::zero()),
            sup_dva_plus: Arc::new(|_| R::zero()),
            sup_dva_abs: Arc::new(|_| R::zero()),
            is_zero: true,
        }
    }

    /// `A(t, v) = xi(t) v`.
    pub fn linear_decay(name: impl Into<String>, xi: Fn1<R>) -> Self {
        let xi2 = xi.clone();
        let xi3 = xi.clone();
        let xi4 = xi.clone();
        Self {
            name: name.into(),
            a: Arc::new(move |t, v| xi(t) * v),
            dva: Arc::new(move |t, _| xi2(t)),
            sup_dva_plus: Arc::new(move |t| xi3(t).max(R::zero())),
            sup_dva_abs: Arc::new(move |t| xi4(t).abs()),
            is_zero: false,
        }
    }

    pub fn linear_decay_const(xi: R) -> Self {
        Self::linear_decay(format!("linear_decay:xi={xi}"), Arc::new(move |_| xi))
    }

    /// The two-branch decay rate: `xi1` on [0, r1], then `-alpha1 / t`.
    pub fn decay_branch(alpha1: R, r1: R, xi1: R) -> Self {
        let xi = move |t: R| if t <= r1 { xi1 } else { -alpha1 / t };
        Self::linear_decay(
            format!("decay_branch:alpha={alpha1},r1={r1},xi1={xi1}"),
            Arc::new(xi),
        )
    }

    /// `A(t, v) = theta(t) v^2 / (1 + v^2)`; the two-phase source term.
    pub fn bl_forcing(name: impl Into<String>, theta: Fn1<R>) -> Self {
        let th2 = theta.clone();
        let th3 = theta.clone();
        let th4 = theta.clone();
        // max_v |2v / (1 + v^2)^2| = 3 sqrt(3) / 8, attained at v = 1/sqrt(3)
        let fmax: R = lit::<R>(3.0) * lit::<R>(3.0).sqrt() / lit(8.0);
        Self {
            name: name.into(),
            a: Arc::new(move |t, v| theta(t) * v * v / (R::one() + v * v)),
            dva: Arc::new(move |t, v| {
                let den = R::one() + v * v;
                th2(t) * lit::<R>(2.0) * v / (den * den)
            }),
            sup_dva_plus: Arc::new(move |t| th3(t).abs() * fmax),
            sup_dva_abs: Arc::new(move |t| th4(t).abs() * fmax),
            is_zero: false,
        }
    }

    pub fn bl_forcing_const(theta: R) -> Self {
        Self::bl_forcing(format!("bl:theta={theta}"), Arc::new(move |_| theta))
    }

    /// Parse a catalog identifier: `zero`, `linear_decay:xi=<v>`,
    /// `decay_branch:alpha=<v>,r1=<v>,xi1=<v>`, `bl:theta=<v>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (head, params) = split_spec(spec);
        match head {
            "zero" => Ok(Self::zero()),
            "linear_decay" => Ok(Self::linear_decay_const(param(&params, "xi", spec)?)),
            "decay_branch" => Ok(Self::decay_branch(
                param(&params, "alpha", spec)?,
                param(&params, "r1", spec)?,
                param(&params, "xi1", spec)?,
            )),
            "bl" => Ok(Self::bl_forcing_const(param(&params, "theta", spec)?)),
            _ => Err(SolverError::InvalidConfig(format!(
                "unknown forcing model '{spec}'"
            ))),
        }
    }
}

/// Deterministic noise intensity sigma(t) in front of the Wiener increment.
#[derive(Clone)]
pub struct NoiseModel<R> {
    pub name: String,
    sigma: Fn1<R>,
    pub is_zero: bool,
}

impl<R: Real> NoiseModel<R> {
    pub fn new(name: impl Into<String>, sigma: Fn1<R>) -> Self {
        Self {
            name: name.into(),
            sigma,
            is_zero: false,
        }
    }

    #[inline]
    pub fn sigma_at(&self, t: R) -> R {
        (self.sigma)(t)
    }

    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            sigma: Arc::new(|_| R::zero()),
            is_zero: true,
        }
    }

    pub fn constant(s: R) -> Self {
        if s == R::zero() {
            return Self::zero();
        }
        Self::new(format!("constant:{s}"), Arc::new(move |_| s))
    }

    /// sigma(t) = c t
    pub fn time_linear(c: R) -> Self {
        Self::new(format!("time_linear:{c}"), Arc::new(move |t| c * t))
    }

    /// Square-integrability witness: trapezoid quadrature of sigma^2.
    pub fn sigma_sq_integral(&self, t: R, n: usize) -> R {
        trapezoid(
            |s| {
                let v = self.sigma_at(s);
                v * v
            },
            t,
            n,
        )
    }

    pub fn from_spec(spec: &str) -> Result<Self> {
        let (head, params) = split_spec(spec);
        match head {
            "zero" => Ok(Self::zero()),
            "constant" => {
                // allow the bare form "constant:0.2"
                if let Ok(v) = params
                    .first()
                    .map(|p| p.as_str())
                    .unwrap_or("")
                    .parse::<f64>()
                {
                    return Ok(Self::constant(lit(v)));
                }
                Ok(Self::constant(param(&params, "sigma", spec)?))
            }
            "time_linear" => Ok(Self::time_linear(param(&params, "c", spec)?)),
            _ => Err(SolverError::InvalidConfig(format!(
                "unknown noise model '{spec}'"
            ))),
        }
    }
}

fn trapezoid<R: Real>(f: impl Fn(R) -> R, t: R, n: usize) -> R {
    if t == R::zero() {
        return R::zero();
    }
    let n = n.max(1);
    let h = t / R::from_usize(n).unwrap();
    let mut acc = (f(R::zero()) + f(t)) * lit(0.5);
    for k in 1..n {
        acc = acc + f(h * R::from_usize(k).unwrap());
    }
    acc * h
}

fn split_spec(spec: &str) -> (&str, Vec<String>) {
    match spec.split_once(':') {
        Some((head, rest)) => (head, rest.split(',').map(|s| s.trim().to_string()).collect()),
        None => (spec, Vec::new()),
    }
}

fn param<R: Real>(params: &[String], key: &str, spec: &str) -> Result<R> {
    for p in params {
        if let Some((k, v)) = p.split_once('=') {
            if k.trim() == key {
                let x: f64 = v.trim().parse().map_err(|_| {
                    SolverError::InvalidConfig(format!("bad value for '{key}' in '{spec}'"))
                })?;
                return Ok(lit(x));
            }
        }
    }
    Err(SolverError::InvalidConfig(format!(
        "missing parameter '{key}' in '{spec}'"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_derivative(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-4;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn buckley_leverett_values() {
        let m = FluxModel::<f64>::buckley_leverett();
        assert_eq!(m.flux_at(0.5), 0.5);
        assert_eq!(m.flux_at(-0.3), 0.0);
        assert_eq!(m.flux_at(1.7), 1.0);
        // derivative oracle at the inflection point
        assert!((m.speed_at(0.5) - fd_derivative(|r| m.flux_at(r), 0.5)).abs() < 1e-6);
        assert!((m.speed_at(0.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_consistency_on_catalog() {
        let fluxes = [
            FluxModel::<f64>::burgers(),
            FluxModel::linear(3.0),
            FluxModel::buckley_leverett(),
        ];
        for m in &fluxes {
            let (lo, hi) = m.range;
            for k in 1..200 {
                let r = lo + (hi - lo) * k as f64 / 200.0;
                // skip the kink neighborhoods of the clamped flux
                if m.name == "buckley_leverett" && (r.abs() < 1e-3 || (r - 1.0).abs() < 1e-3) {
                    continue;
                }
                let fd = fd_derivative(|x| m.flux_at(x), r);
                assert!(
                    (m.speed_at(r) - fd).abs() < 1e-6,
                    "{} at {r}: {} vs {fd}",
                    m.name,
                    m.speed_at(r)
                );
            }
        }
    }

    #[test]
    fn bl_flux_monotone_onto_unit_interval() {
        let m = FluxModel::<f64>::buckley_leverett();
        let mut prev = m.flux_at(-1.0);
        for k in 0..=300 {
            let r = -1.0 + 3.0 * k as f64 / 300.0;
            let b = m.flux_at(r);
            assert!(b >= prev - 1e-15);
            assert!((0.0..=1.0).contains(&b));
            assert!(m.speed_at(r) >= 0.0);
            prev = b;
        }
    }

    #[test]
    fn burgers_and_linear_values() {
        let b = FluxModel::<f64>::burgers();
        assert_eq!(b.flux_at(2.0), 2.0);
        assert_eq!(b.speed_at(-1.0), -1.0);
        assert_eq!(FluxModel::<f64>::linear(3.0).speed_at(0.7), 3.0);
    }

    #[test]
    fn forcing_vanishes_at_zero_and_matches_fd() {
        let models = [
            ForcingModel::<f64>::linear_decay_const(-1.0),
            ForcingModel::bl_forcing_const(1.0),
            ForcingModel::decay_branch(2.0, 0.1, 0.0),
        ];
        for f in &models {
            for &t in &[0.0, 0.05, 0.3, 1.7] {
                assert_eq!(f.a_at(t, 0.0), 0.0, "{}", f.name);
                for k in 0..200 {
                    let v = -2.0 + 4.0 * k as f64 / 200.0;
                    let fd = fd_derivative(|w| f.a_at(t, w), v);
                    assert!((f.dva_at(t, v) - fd).abs() < 1e-6, "{} t={t} v={v}", f.name);
                    assert!(f.sup_dva_plus(t) >= f.dva_at(t, v).max(0.0) - 1e-12);
                    assert!(f.sup_dva_abs(t) >= f.dva_at(t, v).abs() - 1e-12);
                }
            }
        }
    }

    #[test]
    fn linear_decay_examples() {
        let f = ForcingModel::<f64>::linear_decay_const(-1.0);
        assert_eq!(f.a_at(0.3, 2.0), -2.0);
        assert_eq!(f.sup_dva_plus(0.3), 0.0);
        let g = ForcingModel::<f64>::bl_forcing_const(1.0);
        assert_eq!(g.a_at(0.0, 1.0), 0.5);
        assert_eq!(g.dva_at(0.0, 0.0), 0.0);
    }

    #[test]
    fn noise_ito_isometry_witness() {
        let n = NoiseModel::<f64>::time_linear(1.0);
        assert!((n.sigma_sq_integral(1.0, 1000) - 1.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(FluxModel::<f64>::from_spec("burgers").unwrap().name, "burgers");
        assert_eq!(FluxModel::<f64>::from_spec("linear:c=3").unwrap().speed_at(0.0), 3.0);
        assert!(FluxModel::<f64>::from_spec("nope").is_err());
        let f = ForcingModel::<f64>::from_spec("linear_decay:xi=-1").unwrap();
        assert_eq!(f.a_at(0.0, 2.0), -2.0);
        assert!(ForcingModel::<f64>::from_spec("linear_decay").is_err());
        let n = NoiseModel::<f64>::from_spec("constant:0.2").unwrap();
        assert_eq!(n.sigma_at(5.0), 0.2);
        assert!(NoiseModel::<f64>::from_spec("constant:sigma=0.3").unwrap().sigma_at(0.0) == 0.3);
    }
}
