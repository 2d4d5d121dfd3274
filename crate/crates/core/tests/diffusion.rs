mod common;

use common::{small_plane_source, with_steps};
use kinetic_dlra::bench::{compare, plane_source_density, solve};
use kinetic_dlra::config::{GridConfig, InitialCondition, SolverConfig, SolverKind};
use kinetic_dlra::diffusion::diffusion_step;
use kinetic_dlra::full::cfl_dt;
use kinetic_dlra::grid::Boundary;
use nalgebra::DVector;

#[test]
fn gaussian_follows_heat_kernel() {
    let mut cfg = SolverConfig::plane_source(1.0, SolverKind::Diffusion, None, 0.05);
    cfg.grid = GridConfig {
        x_left: -2.0,
        x_right: 2.0,
        nx: 800,
        boundary: Boundary::Periodic,
    };
    cfg.solver.moments = 4;
    cfg.physics.initial = InitialCondition::PlaneSource { std: 0.1 };
    let p = cfg.build().unwrap();
    let t = solve(&p, SolverKind::Diffusion).unwrap();
    assert_eq!(t.final_time, 0.05);
    let std = (0.1f64 * 0.1 + 2.0 * 0.05 / 3.0).sqrt();
    let exact = DVector::from_iterator(800, p.grid.midpoints().into_iter().map(|x| plane_source_density(x, std)));
    let c = compare(&t.final_rho, &exact, &p.grid).unwrap();
    assert!(c.rel_l2 <= 2e-3, "{c:?}");
}

#[test]
fn maximum_principle_and_mass() {
    let mut cfg = small_plane_source(1.0, SolverKind::Diffusion, None, 300, 6, 0.05);
    cfg.grid.boundary = Boundary::Periodic;
    cfg.physics.sigma = kinetic_dlra::config::SigmaSpec::Tabulated((0..300).map(|i| 1.0 + (i % 7) as f64 * 0.3).collect());
    let p = cfg.build().unwrap();
    let dt = cfl_dt(&p.ops.quad, p.ops.n, 0.0, p.grid.dx, p.sigma.sigma0, 1.0).unwrap().dt;
    let mut rho = p.initial.rho.clone();
    let mass0 = rho.sum() * p.grid.dx;
    for _ in 0..2000 {
        let next = diffusion_step(&rho, &p.sigma, &p.grid, dt).unwrap();
        assert!(next.max() <= rho.max() + 1e-13);
        assert!(next.min() >= rho.min() - 1e-13);
        rho = next;
    }
    assert!((rho.sum() * p.grid.dx - mass0).abs() <= 1e-12 * mass0);
}

#[test]
fn diffusion_runs_are_deterministic() {
    let cfg = with_steps(small_plane_source(1.0, SolverKind::Diffusion, None, 100, 4, 0.05), 100);
    let p = cfg.build().unwrap();
    assert_eq!(solve(&p, SolverKind::Diffusion).unwrap(), solve(&p, SolverKind::Diffusion).unwrap());
}

/// The full kinetic scheme at eps = 1e-5 against the diffusion limit on the
/// plane-source benchmark (about 3e4 steps of the full scheme).
#[test]
fn diffusion_limit_of_full_scheme() {
    let cfg = SolverConfig::plane_source(1e-5, SolverKind::Full, None, 0.2);
    let p = cfg.build().unwrap();
    let full = solve(&p, SolverKind::Full).unwrap();
    let diff = solve(&p, SolverKind::Diffusion).unwrap();
    let c = compare(&full.final_rho, &diff.final_rho, &p.grid).unwrap();
    assert!(c.rel_l2 <= 1e-2, "{c:?}");
}
