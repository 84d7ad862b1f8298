//! Kinetic representation of a density: the signed chi profile, its exact
//! cell-average projection, density reconstruction and the defect measure.
//!
//! Everything here works with cell averages rather than point values, which
//! turns the continuum identities (the v-integral of chi equals the density,
//! and the positive-part distance between two chi profiles equals the
//! positive part of the density difference) into machine precision facts on
//! the grid.

use crate::error::{Result, SolverError};
use crate::grid::{SpaceGrid, VelocityGrid};
use crate::scalar::{lit, Real};

/// Default relative tolerance for the defect nonnegativity check.
pub const DEFAULT_DEFECT_TOL: f64 = 1e-10;

/// Pointwise signed indicator of the interval between 0 and `rho`.
///
/// Returns 1 on (0, rho), -1 on (rho, 0) and 0 elsewhere, including at the
/// endpoints; the endpoint convention is irrelevant for every cell-averaged
/// quantity built on top of this.
#[inline]
pub fn chi<R: Real>(rho: R, v: R) -> R {
    if R::zero() < v && v < rho {
        R::one()
    } else if rho < v && v < R::zero() {
        -R::one()
    } else {
        R::zero()
    }
}

/// Average of `chi(rho, .)` over the velocity cell `(v_lo, v_hi)`.
///
/// The signed overlap of the cell with the chi support, divided by the cell
/// width; summing over a grid that covers the support recovers `rho`.
#[inline]
pub fn chi_cell_average<R: Real>(rho: R, v_lo: R, v_hi: R) -> R {
    debug_assert!(v_lo < v_hi);
    let lo = R::zero().min(rho);
    let hi = R::zero().max(rho);
    let overlap = (v_hi.min(hi) - v_lo.max(lo)).max(R::zero());
    let signed = if rho < R::zero() { -overlap } else { overlap };
    signed / (v_hi - v_lo)
}

/// Cell-averaged density on a space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField<R> {
    pub grid: SpaceGrid<R>,
    pub values: Vec<R>,
}

impl<R: Real> DensityField<R> {
    pub fn new(grid: SpaceGrid<R>, values: Vec<R>) -> Self {
        assert_eq!(values.len(), grid.n_cells);
        Self { grid, values }
    }

    pub fn from_fn(grid: SpaceGrid<R>, f: impl Fn(R) -> R) -> Self {
        let values = grid.centers().map(f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: SpaceGrid<R>) -> Self {
        Self {
            grid,
            values: vec![R::zero(); grid.n_cells],
        }
    }

    pub fn mass(&self) -> R {
        self.values.iter().copied().sum::<R>() * self.grid.dx
    }

    pub fn l1_norm(&self) -> R {
        self.values.iter().map(|v| v.abs()).sum::<R>() * self.grid.dx
    }

    pub fn linf_norm(&self) -> R {
        self.values.iter().fold(R::zero(), |m, v| m.max(v.abs()))
    }

    pub fn l1_distance(&self, other: &Self) -> R {
        assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs())
            .sum::<R>()
            * self.grid.dx
    }

    /// Piecewise-linear interpolation through cell centers, zero outside.
    pub fn interpolate(&self, x: R) -> R {
        let n = self.grid.n_cells;
        let s = (x - self.grid.center(0)) / self.grid.dx;
        if s <= -R::one() || s >= R::from_usize(n).unwrap() {
            return R::zero();
        }
        let k = s.floor();
        let theta = s - k;
        let ki = k.to_isize().unwrap();
        let at = |i: isize| -> R {
            if i < 0 || i >= n as isize {
                R::zero()
            } else {
                self.values[i as usize]
            }
        };
        at(ki) * (R::one() - theta) + at(ki + 1) * theta
    }
}

/// Cell averages of the kinetic unknown on the tensor (space x velocity)
/// grid, stored x-major: `values[i * n_v + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticField<R> {
    pub xgrid: SpaceGrid<R>,
    pub vgrid: VelocityGrid<R>,
    pub values: Vec<R>,
}

impl<R: Real> KineticField<R> {
    pub fn zeros(xgrid: SpaceGrid<R>, vgrid: VelocityGrid<R>) -> Self {
        Self {
            xgrid,
            vgrid,
            values: vec![R::zero(); xgrid.n_cells * vgrid.n_cells],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> R {
        self.values[i * self.vgrid.n_cells + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[R] {
        let nv = self.vgrid.n_cells;
        &self.values[i * nv..(i + 1) * nv]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [R] {
        let nv = self.vgrid.n_cells;
        &mut self.values[i * nv..(i + 1) * nv]
    }

    pub fn max_abs(&self) -> R {
        self.values.iter().fold(R::zero(), |m, v| m.max(v.abs()))
    }

    pub fn l1_norm(&self) -> R {
        self.values.iter().map(|v| v.abs()).sum::<R>() * self.xgrid.dx * self.vgrid.dv
    }

    pub fn l1_distance(&self, other: &Self) -> R {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs())
            .sum::<R>()
            * self.xgrid.dx
            * self.vgrid.dv
    }

    /// L1 norm of the positive part of `self - other`.
    pub fn positive_part_distance(&self, other: &Self) -> R {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).max(R::zero()))
            .sum::<R>()
            * self.xgrid.dx
            * self.vgrid.dv
    }
}

/// Lift a density to its equilibrium kinetic profile, cell by cell.
///
/// Exact in the sense that `reconstruct_density` inverts it to rounding
/// error. Fails with `SupportOverflow` when some density value does not fit
/// the velocity band.
pub fn project_density<R: Real>(
    rho: &DensityField<R>,
    vgrid: &VelocityGrid<R>,
) -> Result<KineticField<R>> {
    if let Some(&r) = rho
        .values
        .iter()
        .find(|&&r| r > vgrid.v_max || r < vgrid.v_min)
    {
        return Err(SolverError::SupportOverflow {
            what: "density",
            value: r.to_f64().unwrap_or(f64::NAN),
            lo: vgrid.v_min.to_f64().unwrap_or(f64::NAN),
            hi: vgrid.v_max.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut u = KineticField::zeros(rho.grid, *vgrid);
    for (i, &r) in rho.values.iter().enumerate() {
        let row = u.row_mut(i);
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = chi_cell_average(r, vgrid.edge(j), vgrid.edge(j + 1));
        }
    }
    Ok(u)
}

/// Discrete v-integral of the kinetic field.
pub fn reconstruct_density<R: Real>(u: &KineticField<R>) -> DensityField<R> {
    let values = (0..u.xgrid.n_cells)
        .map(|i| u.row(i).iter().copied().sum::<R>() * u.vgrid.dv)
        .collect();
    DensityField::new(u.xgrid, values)
}

/// Grid integral of the positive part of `chi_a - chi_b`; equals
/// `max(a - b, 0)` for any `a`, `b` inside the band.
pub fn chi_positive_distance<R: Real>(a: R, b: R, vgrid: &VelocityGrid<R>) -> R {
    debug_assert!(vgrid.contains(a) && vgrid.contains(b));
    let mut acc = R::zero();
    for j in 0..vgrid.n_cells {
        let (lo, hi) = (vgrid.edge(j), vgrid.edge(j + 1));
        let d = chi_cell_average(a, lo, hi) - chi_cell_average(b, lo, hi);
        acc = acc + d.max(R::zero());
    }
    acc * vgrid.dv
}

/// Defect measure scaled by 1/eps, stored at velocity cell edges as the
/// running v-antiderivative of `chi_rho - u`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectField<R> {
    pub xgrid: SpaceGrid<R>,
    pub vgrid: VelocityGrid<R>,
    pub eps: R,
    /// `values[i * (n_v + 1) + j]` is the value at edge `j` of column `i`.
    pub values: Vec<R>,
}

impl<R: Real> DefectField<R> {
    #[inline]
    pub fn at_edge(&self, i: usize, j: usize) -> R {
        self.values[i * (self.vgrid.n_cells + 1) + j]
    }

    pub fn min_value(&self) -> R {
        self.values.iter().fold(R::zero(), |m, &v| m.min(v))
    }

    /// Space-velocity integral; a bulk deviation-from-equilibrium diagnostic.
    pub fn total(&self) -> R {
        self.values.iter().copied().sum::<R>() * self.xgrid.dx * self.vgrid.dv
    }
}

pub fn defect_measure<R: Real>(u: &KineticField<R>, eps: R) -> Result<DefectField<R>> {
    defect_measure_with_tol(u, eps, lit(DEFAULT_DEFECT_TOL))
}

/// Build the edge-valued defect measure and check its two structural facts:
/// every value is nonnegative (up to `tol`, relative to the field scale) and
/// the last edge value, the total v-integral of `chi_rho - u`, vanishes.
pub fn defect_measure_with_tol<R: Real>(
    u: &KineticField<R>,
    eps: R,
    tol: R,
) -> Result<DefectField<R>> {
    assert!(eps > R::zero());
    let rho = reconstruct_density(u);
    let nv = u.vgrid.n_cells;
    let mut values = vec![R::zero(); u.xgrid.n_cells * (nv + 1)];
    let scale_base = R::one() / eps;
    for i in 0..u.xgrid.n_cells {
        let r = rho.values[i];
        let row = u.row(i);
        let mut acc = R::zero();
        for j in 0..nv {
            let eq = chi_cell_average(r, u.vgrid.edge(j), u.vgrid.edge(j + 1));
            acc = acc + (eq - row[j]) * u.vgrid.dv / eps;
            values[i * (nv + 1) + j + 1] = acc;
        }
    }
    let scale = values
        .iter()
        .fold(scale_base, |m, &v| m.max(v.abs()))
        .max(R::one());
    let tol_abs = tol * scale;
    for i in 0..u.xgrid.n_cells {
        for j in 0..=nv {
            let v = values[i * (nv + 1) + j];
            if v < -tol_abs {
                return Err(SolverError::NegativeDefect {
                    value: v.to_f64().unwrap_or(f64::NAN),
                    i,
                    j,
                    tol: tol_abs.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
    Ok(DefectField {
        xgrid: u.xgrid,
        vgrid: u.vgrid,
        eps,
        values,
    })
}
