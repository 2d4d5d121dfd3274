//! Full-rank micro-macro IMEX scheme and the CFL time-step policy.
//!
//! One step reads
//!
//! ```text
//! g^{n+1} = [g^n - (dt/eps) L g^n - (dt/eps^2) a D^+ rho^n] / (1 + dt sigma / eps^2)
//! rho^{n+1} = rho^n - dt a_0 D^- g_1^{n+1}
//! ```
//!
//! with advection explicit and scattering implicit (an exact scalar division
//! per interface).

use serde::Serialize;

use crate::config::{Problem, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::{advection_apply, div_to_midpoints, grad_to_interfaces, guard, FullState, Grid, SigmaField};
use crate::operators::FluxOperators;
use crate::quadrature::QuadratureSet;
use crate::trajectory::{integrate, Trajectory};

/// Chosen time step and the quadrature node that limits it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CflReport {
    pub dt: f64,
    /// Index into the quadrature nodes (ascending order).
    pub minimizing_k: usize,
    pub mu_min: f64,
    pub w_min: f64,
    /// `eps dx / |mu_k|` at the minimizer.
    pub hyperbolic_part: f64,
    /// `sigma_0 dx^2 / (2 mu_k^2)` at the minimizer.
    pub parabolic_part: f64,
    pub safety: f64,
}

/// Energy-stable step size
///
/// ```text
/// dt = safety * min_k 1/(2 + (N+1) w_k) (eps dx/|mu_k| + sigma_0 dx^2 / (2 mu_k^2))
/// ```
///
/// over nodes with `mu_k != 0`. Exact ties between `+mu` and `-mu` report the
/// negative node. `eps = 0` gives the purely parabolic limit.
pub fn cfl_dt(
    quad: &QuadratureSet,
    n_moments: usize,
    eps: f64,
    dx: f64,
    sigma0: f64,
    safety: f64,
) -> Result<CflReport> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be non-negative, got {eps}")));
    }
    if !(dx.is_finite() && dx > 0.0) || !(sigma0.is_finite() && sigma0 > 0.0) {
        return Err(Error::InvalidArgument("dx and sigma0 must be positive".into()));
    }
    if !(safety.is_finite() && safety > 0.0) {
        return Err(Error::InvalidArgument(format!("safety must be positive, got {safety}")));
    }
    let np1 = (n_moments + 1) as f64;
    let mut best: Option<(usize, f64)> = None;
    for (k, (&mu, &w)) in quad.nodes.iter().zip(&quad.weights).enumerate() {
        if mu == 0.0 {
            continue;
        }
        let bound = (eps * dx / mu.abs() + sigma0 * dx * dx / (2.0 * mu * mu)) / (2.0 + np1 * w);
        if best.is_none_or(|(_, b)| bound < b) {
            best = Some((k, bound));
        }
    }
    let (k, bound) = best.ok_or_else(|| Error::Internal("no nonzero quadrature node".into()))?;
    let mu = quad.nodes[k];
    Ok(CflReport {
        dt: safety * bound,
        minimizing_k: k,
        mu_min: mu,
        w_min: quad.weights[k],
        hyperbolic_part: eps * dx / mu.abs(),
        parabolic_part: sigma0 * dx * dx / (2.0 * mu * mu),
        safety,
    })
}

/// One step of the full-rank micro-macro scheme.
pub fn full_step(
    state: &FullState,
    ops: &FluxOperators,
    grid: &Grid,
    sigma: &SigmaField,
    eps: f64,
    dt: f64,
) -> Result<FullState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    state.check(grid, ops.n)?;
    sigma.check(grid)?;

    let lg = advection_apply(ops, &state.g, grid)?;
    guard(lg.as_slice(), 0, "advection")?;
    let drho = grad_to_interfaces(&state.rho, grid)?;

    let mut g = state.g.clone();
    g.zip_apply(&lg, |a, b| *a += -dt / eps * b);
    g.column_mut(0).axpy(-dt / (eps * eps) * ops.a0, &drho, 1.0);
    let c = dt / (eps * eps);
    for (i, mut row) in g.row_iter_mut().enumerate() {
        row /= 1.0 + c * sigma.values[i];
    }
    guard(g.as_slice(), 0, "micro update")?;

    let div = div_to_midpoints(g.column(0).as_slice(), grid)?;
    let mut rho = state.rho.clone();
    rho.axpy(-dt * ops.a0, &div, 1.0);
    guard(rho.as_slice(), 0, "macro update")?;

    Ok(FullState {
        rho,
        g,
        time: state.time + dt,
    })
}

/// Runs the full-rank scheme for a discretised problem.
pub fn run_full_problem(problem: &Problem) -> Result<Trajectory> {
    let Problem { grid, ops, sigma, eps, .. } = problem;
    let mut state = problem.initial.clone();
    state.check(grid, ops.n)?;
    let e0 = state.energy(*eps, grid);
    let rho0 = state.rho.clone();
    let mut traj = integrate(
        &rho0,
        e0,
        problem.t_end,
        &problem.cfl,
        &problem.profile_times,
        |n, h| {
            state = full_step(&state, ops, grid, sigma, *eps, h).map_err(|e| e.at_step(n))?;
            Ok((state.rho.clone(), state.energy(*eps, grid)))
        },
    )?;
    traj.final_g = Some(state.g);
    Ok(traj)
}

pub fn run_full(config: &SolverConfig) -> Result<Trajectory> {
    run_full_problem(&config.build()?)
}
