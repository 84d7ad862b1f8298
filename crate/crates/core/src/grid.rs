//! Uniform cell-centered grids in space and velocity.

use crate::error::{Result, SolverError};
use crate::scalar::{lit, Real};

/// Uniform grid for the spatial variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid<R> {
    pub x_min: R,
    pub x_max: R,
    pub n_cells: usize,
    pub dx: R,
}

impl<R: Real> SpaceGrid<R> {
    pub fn new(x_min: R, x_max: R, n_cells: usize) -> Result<Self> {
        if !(x_min < x_max) || n_cells == 0 {
            return Err(SolverError::InvalidConfig(format!(
                "space grid needs x_min < x_max and n_cells > 0, got [{x_min}, {x_max}] with {n_cells} cells"
            )));
        }
        let dx = (x_max - x_min) / R::from_usize(n_cells).unwrap();
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            dx,
        })
    }

    #[inline]
    pub fn center(&self, i: usize) -> R {
        self.x_min + self.dx * (R::from_usize(i).unwrap() + lit(0.5))
    }

    pub fn centers(&self) -> impl Iterator<Item = R> + '_ {
        (0..self.n_cells).map(move |i| self.center(i))
    }
}

/// Uniform grid for the kinetic velocity variable.
///
/// The band must straddle zero so that the chi profile of any representable
/// density fits inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityGrid<R> {
    pub v_min: R,
    pub v_max: R,
    pub n_cells: usize,
    pub dv: R,
}

impl<R: Real> VelocityGrid<R> {
    pub fn new(v_min: R, v_max: R, n_cells: usize) -> Result<Self> {
        if !(v_min < R::zero() && R::zero() < v_max) || n_cells == 0 {
            return Err(SolverError::InvalidConfig(format!(
                "velocity grid needs v_min < 0 < v_max and n_cells > 0, got [{v_min}, {v_max}] with {n_cells} cells"
            )));
        }
        let dv = (v_max - v_min) / R::from_usize(n_cells).unwrap();
        Ok(Self {
            v_min,
            v_max,
            n_cells,
            dv,
        })
    }

    /// Symmetric band sized from the support bound of the relaxation model:
    /// the chi support of the initial density, grown by the velocity
    /// characteristics over `[0, t_final]`, plus two cells of padding.
    ///
    /// `dva_integral` is `int_0^T ||dA/dv(t,.)||_inf dt`. An even cell count
    /// keeps v = 0 on a cell edge, which the forcing step relies on to keep
    /// the sign pattern of the kinetic field intact.
    pub fn for_support(rho_linf: R, dva_integral: R, n_cells: usize) -> Result<Self> {
        let n_cells = if n_cells % 2 == 0 { n_cells } else { n_cells + 1 };
        let band = rho_linf.max(lit(1e-6)) * dva_integral.max(R::zero()).exp();
        let pad = band * lit(4.0) / R::from_usize(n_cells).unwrap();
        Self::new(-(band + pad), band + pad, n_cells)
    }

    /// Left edge of cell `j`; `edge(n_cells)` is the right end of the band.
    #[inline]
    pub fn edge(&self, j: usize) -> R {
        if j == self.n_cells {
            self.v_max
        } else {
            self.v_min + self.dv * R::from_usize(j).unwrap()
        }
    }

    #[inline]
    pub fn center(&self, j: usize) -> R {
        self.v_min + self.dv * (R::from_usize(j).unwrap() + lit(0.5))
    }

    pub fn centers(&self) -> impl Iterator<Item = R> + '_ {
        (0..self.n_cells).map(move |j| self.center(j))
    }

    #[inline]
    pub fn contains(&self, v: R) -> bool {
        self.v_min <= v && v <= self.v_max
    }
}
