//! Staggered grid, upwind stencils and the discrete energy.
//!
//! The density `rho` lives on the `Nx` cell midpoints
//! `x_j = x_L + (j + 1/2) dx`. The microscopic moments live on interfaces
//! `x_L + i dx`; interface `i` sits between midpoints `i-1` and `i`.
//! Periodic grids carry `Nx` interfaces (interface `Nx` is identified with
//! interface 0), vacuum grids carry `Nx + 1` and treat every value outside
//! the domain as zero.
//!
//! Interface fields are stored row-wise: an `n_interfaces x N` matrix whose
//! row `i` is the moment vector `g_{i}`. Stencils act on each column
//! independently.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::FluxOperators;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Vacuum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x_left: f64,
    pub x_right: f64,
    pub nx: usize,
    pub dx: f64,
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(x_left: f64, x_right: f64, nx: usize, boundary: Boundary) -> Result<Self> {
        if !(x_left.is_finite() && x_right.is_finite()) || x_right <= x_left {
            return Err(Error::InvalidArgument(format!(
                "domain [{x_left}, {x_right}] is empty or not finite"
            )));
        }
        if nx < 2 {
            return Err(Error::InvalidArgument("Nx must be at least 2".into()));
        }
        Ok(Grid {
            x_left,
            x_right,
            nx,
            dx: (x_right - x_left) / nx as f64,
            boundary,
        })
    }

    pub fn n_interfaces(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.nx,
            Boundary::Vacuum => self.nx + 1,
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    /// Measured from the domain centre, so a symmetric domain gives exactly
    /// mirrored coordinates.
    pub fn midpoints(&self) -> Vec<f64> {
        let c = 0.5 * (self.x_left + self.x_right);
        let half = 0.5 * self.nx as f64;
        (0..self.nx).map(|j| c + (j as f64 + 0.5 - half) * self.dx).collect()
    }

    pub fn interfaces(&self) -> Vec<f64> {
        let c = 0.5 * (self.x_left + self.x_right);
        let half = 0.5 * self.nx as f64;
        (0..self.n_interfaces()).map(|i| c + (i as f64 - half) * self.dx).collect()
    }

    /// Discrete L2 norm squared of a midpoint field, `sum rho_j^2 dx`.
    pub fn norm2_midpoints(&self, rho: &DVector<f64>) -> f64 {
        rho.norm_squared() * self.dx
    }

    /// `sum_i g_i^T g_i dx`.
    pub fn norm2_interfaces(&self, g: &DMatrix<f64>) -> f64 {
        g.norm_squared() * self.dx
    }

    fn check_interfaces(&self, field: &DMatrix<f64>, context: &'static str) -> Result<()> {
        if field.nrows() != self.n_interfaces() {
            return Err(Error::shape(context, format!("{} interface rows", self.n_interfaces()), field.nrows()));
        }
        Ok(())
    }

    fn check_midpoints(&self, rho: &DVector<f64>, context: &'static str) -> Result<()> {
        if rho.len() != self.nx {
            return Err(Error::shape(context, format!("{} midpoints", self.nx), rho.len()));
        }
        Ok(())
    }

    /// Value at index `i` of a column with zero/periodic extension.
    #[inline]
    fn at(&self, col: &[f64], i: isize) -> f64 {
        let n = col.len() as isize;
        if i >= 0 && i < n {
            col[i as usize]
        } else if self.is_periodic() {
            col[i.rem_euclid(n) as usize]
        } else {
            0.0
        }
    }
}

/// Scattering cross-section sampled at interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaField {
    pub values: Vec<f64>,
    pub sigma0: f64,
}

impl SigmaField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("sigma field is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidArgument(
                "sigma must be finite and strictly positive".into(),
            ));
        }
        let sigma0 = values.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(SigmaField { values, sigma0 })
    }

    pub fn constant(grid: &Grid, value: f64) -> Result<Self> {
        Self::new(vec![value; grid.n_interfaces()])
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    pub(crate) fn check(&self, grid: &Grid) -> Result<()> {
        if self.values.len() != grid.n_interfaces() {
            return Err(Error::shape("sigma", grid.n_interfaces(), self.values.len()));
        }
        Ok(())
    }
}

/// Density on midpoints plus microscopic moments on interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub rho: DVector<f64>,
    /// `n_interfaces x N`.
    pub g: DMatrix<f64>,
    pub time: f64,
}

impl FullState {
    pub fn new(rho: DVector<f64>, g: DMatrix<f64>, time: f64) -> Result<Self> {
        if !all_finite(rho.as_slice()) || !all_finite(g.as_slice()) {
            return Err(Error::InvalidArgument("state contains non-finite values".into()));
        }
        Ok(FullState { rho, g, time })
    }

    pub fn zeros(grid: &Grid, n_moments: usize) -> Self {
        FullState {
            rho: DVector::zeros(grid.nx),
            g: DMatrix::zeros(grid.n_interfaces(), n_moments),
            time: 0.0,
        }
    }

    pub fn check(&self, grid: &Grid, n_moments: usize) -> Result<()> {
        grid.check_midpoints(&self.rho, "state rho")?;
        grid.check_interfaces(&self.g, "state g")?;
        if self.g.ncols() != n_moments {
            return Err(Error::shape("state g", format!("{n_moments} moments"), self.g.ncols()));
        }
        Ok(())
    }

    pub fn energy(&self, eps: f64, grid: &Grid) -> f64 {
        energy(&self.rho, &self.g, eps, grid)
    }
}

pub(crate) fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

pub(crate) fn guard(values: &[f64], step: usize, operator: &'static str) -> Result<()> {
    if all_finite(values) {
        Ok(())
    } else {
        Err(Error::NonFinite { step, operator })
    }
}

fn map_columns<F>(field: &DMatrix<f64>, mut stencil: F) -> DMatrix<f64>
where
    F: FnMut(&[f64], usize) -> f64,
{
    let rows = field.nrows();
    let mut out = DMatrix::zeros(rows, field.ncols());
    for (c, col) in field.column_iter().enumerate() {
        let src = col.as_slice();
        let dst = out.column_mut(c);
        for (i, v) in dst.into_iter().enumerate() {
            *v = stencil(src, i);
        }
    }
    out
}

/// Forward difference `(g_{i+1} - g_i) / dx` on an interface field.
pub fn d_plus(field: &DMatrix<f64>, grid: &Grid) -> Result<DMatrix<f64>> {
    grid.check_interfaces(field, "d_plus")?;
    let inv = 1.0 / grid.dx;
    Ok(map_columns(field, |c, i| {
        (grid.at(c, i as isize + 1) - c[i]) * inv
    }))
}

/// Backward difference `(g_i - g_{i-1}) / dx` on an interface field.
pub fn d_minus(field: &DMatrix<f64>, grid: &Grid) -> Result<DMatrix<f64>> {
    grid.check_interfaces(field, "d_minus")?;
    let inv = 1.0 / grid.dx;
    Ok(map_columns(field, |c, i| {
        (c[i] - grid.at(c, i as isize - 1)) * inv
    }))
}

/// Density gradient on interfaces, `(rho_i - rho_{i-1}) / dx` at interface
/// `i` (the `D^+ rho` of the micro equation).
pub fn grad_to_interfaces(rho: &DVector<f64>, grid: &Grid) -> Result<DVector<f64>> {
    grid.check_midpoints(rho, "grad_to_interfaces")?;
    let r = rho.as_slice();
    let inv = 1.0 / grid.dx;
    Ok(DVector::from_fn(grid.n_interfaces(), |i, _| {
        let i = i as isize;
        (grid.at(r, i) - grid.at(r, i - 1)) * inv
    }))
}

/// Divergence of an interface scalar onto midpoints, `(g_{j+1} - g_j)/dx`
/// at midpoint `j` (the `D^- g_1` of the macro equation).
pub fn div_to_midpoints(g1: &[f64], grid: &Grid) -> Result<DVector<f64>> {
    if g1.len() != grid.n_interfaces() {
        return Err(Error::shape("div_to_midpoints", grid.n_interfaces(), g1.len()));
    }
    let inv = 1.0 / grid.dx;
    Ok(DVector::from_fn(grid.nx, |j, _| {
        let j = j as isize;
        (grid.at(g1, j + 1) - grid.at(g1, j)) * inv
    }))
}

/// Centered difference `(g_{i+1} - g_{i-1}) / (2 dx)`.
pub fn centered_difference(field: &DMatrix<f64>, grid: &Grid) -> Result<DMatrix<f64>> {
    grid.check_interfaces(field, "centered_difference")?;
    let s = 0.5 / grid.dx;
    Ok(map_columns(field, |c, i| {
        let i = i as isize;
        (grid.at(c, i + 1) - grid.at(c, i - 1)) * s
    }))
}

/// Second difference `(g_{i+1} - 2 g_i + g_{i-1}) / dx^2`.
pub fn second_difference(field: &DMatrix<f64>, grid: &Grid) -> Result<DMatrix<f64>> {
    grid.check_interfaces(field, "second_difference")?;
    let s = 1.0 / (grid.dx * grid.dx);
    Ok(map_columns(field, |c, i| {
        let ii = i as isize;
        (grid.at(c, ii + 1) - 2.0 * c[i] + grid.at(c, ii - 1)) * s
    }))
}

/// Upwind advection `L g = A^+ D^- g + A^- D^+ g`, evaluated in the
/// equivalent form `A (centered g) - (dx/2) |A| (second difference g)` so
/// only the stabilization needs a dense product.
pub fn advection_apply(ops: &FluxOperators, g: &DMatrix<f64>, grid: &Grid) -> Result<DMatrix<f64>> {
    if g.ncols() != ops.n {
        return Err(Error::shape("advection_apply", format!("{} moments", ops.n), g.ncols()));
    }
    let centered = centered_difference(g, grid)?;
    let second = second_difference(g, grid)?;
    let mut out = ops.right_mul_a(&centered);
    out.gemm(-0.5 * grid.dx, &second, &ops.abs_a, 1.0);
    Ok(out)
}

/// `||rho||^2 + eps^2 ||g||^2` with dx-weighted discrete norms.
pub fn energy(rho: &DVector<f64>, g: &DMatrix<f64>, eps: f64, grid: &Grid) -> f64 {
    grid.norm2_midpoints(rho) + eps * eps * grid.norm2_interfaces(g)
}
