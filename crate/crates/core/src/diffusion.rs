//! Explicit diffusion scheme, the `eps -> 0` limit of the kinetic schemes.
//!
//! `rho^{n+1} = rho^n + (dt/3) D^-( sigma^{-1} D^+ rho^n )`, with the
//! gradient and `1/sigma` on interfaces and the divergence on midpoints.
//! This is exactly the macro update fed by the micro equilibrium
//! `g = -(1/sigma) D^+ rho a`, since `a_0^2 = 1/3`.

use nalgebra::DVector;

use crate::config::{Problem, SolverConfig};
use crate::error::{Error, Result};
use crate::full::cfl_dt;
use crate::grid::{div_to_midpoints, grad_to_interfaces, guard, Grid, SigmaField};
use crate::trajectory::{integrate, Trajectory};

pub fn diffusion_step(rho: &DVector<f64>, sigma: &SigmaField, grid: &Grid, dt: f64) -> Result<DVector<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    sigma.check(grid)?;
    let mut flux = grad_to_interfaces(rho, grid)?;
    for (f, s) in flux.iter_mut().zip(&sigma.values) {
        *f /= s;
    }
    let div = div_to_midpoints(flux.as_slice(), grid)?;
    let mut next = rho.clone();
    next.axpy(dt / 3.0, &div, 1.0);
    guard(next.as_slice(), 0, "diffusion update")?;
    Ok(next)
}

/// Runs the diffusion scheme with the parabolic (`eps = 0`) CFL step.
/// The recorded energy is `||rho||^2`.
pub fn run_diffusion_problem(problem: &Problem) -> Result<Trajectory> {
    let Problem { grid, ops, sigma, .. } = problem;
    let cfl = cfl_dt(&ops.quad, ops.n, 0.0, grid.dx, sigma.sigma0, problem.cfl.safety)?;
    let mut rho = problem.initial.rho.clone();
    if rho.len() != grid.nx {
        return Err(Error::shape("rho", grid.nx, rho.len()));
    }
    let e0 = grid.norm2_midpoints(&rho);
    integrate(&rho.clone(), e0, problem.t_end, &cfl, &problem.profile_times, |n, h| {
        rho = diffusion_step(&rho, sigma, grid, h).map_err(|e| e.at_step(n))?;
        Ok((rho.clone(), grid.norm2_midpoints(&rho)))
    })
}

pub fn run_diffusion(config: &SolverConfig) -> Result<Trajectory> {
    run_diffusion_problem(&config.build()?)
}
