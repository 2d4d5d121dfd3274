#![allow(dead_code)]

pub mod lemmas;

use kinetic_dlra::config::{InitialCondition, SolverConfig, SolverKind};
use kinetic_dlra::grid::{Boundary, Grid};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Plain (unweighted) sum over interfaces and moments of `a .* b`.
pub fn bracket(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

pub fn periodic_grid(nx: usize) -> Grid {
    Grid::new(0.0, 1.0, nx, Boundary::Periodic).unwrap()
}

/// Dense forward/backward difference matrices on interfaces.
pub fn dense_differences(grid: &Grid) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = grid.n_interfaces();
    let h = grid.dx;
    let wrap = grid.is_periodic();
    let mut dp = DMatrix::zeros(m, m);
    let mut dm = DMatrix::zeros(m, m);
    for i in 0..m {
        dp[(i, i)] = -1.0 / h;
        dm[(i, i)] = 1.0 / h;
        if i + 1 < m {
            dp[(i, i + 1)] = 1.0 / h;
        } else if wrap {
            dp[(i, 0)] = 1.0 / h;
        }
        if i > 0 {
            dm[(i, i - 1)] = -1.0 / h;
        } else if wrap {
            dm[(i, m - 1)] = -1.0 / h;
        }
    }
    (dp, dm)
}

/// Plane source scaled down to `nx` cells and `n` moments.
pub fn small_plane_source(eps: f64, kind: SolverKind, rank: Option<usize>, nx: usize, n: usize, std: f64) -> SolverConfig {
    let mut cfg = SolverConfig::plane_source(eps, kind, rank, 1.0);
    cfg.grid.nx = nx;
    cfg.solver.moments = n;
    cfg.physics.initial = InitialCondition::PlaneSource { std };
    cfg
}

/// Sets `t_end` to `steps` CFL steps.
pub fn with_steps(mut cfg: SolverConfig, steps: usize) -> SolverConfig {
    cfg.solver.t_end = 1.0;
    let dt = cfg.build().unwrap().cfl.dt;
    cfg.solver.t_end = steps as f64 * dt;
    cfg
}
