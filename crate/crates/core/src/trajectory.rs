//! Fixed-step time loop shared by all solvers.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::full::CflReport;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub requested_time: f64,
    /// Time of the first step at or after `requested_time`.
    pub time: f64,
    pub step: usize,
    pub rho: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub step: usize,
    pub t: f64,
    pub e: f64,
}

/// Output of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// One entry per step, starting with the initial state.
    pub energy: Vec<EnergyRecord>,
    pub dt: f64,
    pub cfl: CflReport,
    pub steps: usize,
    pub final_time: f64,
    pub final_rho: DVector<f64>,
    /// Final microscopic field (reconstructed for low-rank runs); `None` for
    /// the diffusion solver.
    pub final_g: Option<DMatrix<f64>>,
}

impl Trajectory {
    /// Largest relative per-step energy increase, `max (e^{n+1} - e^n) / e^n`.
    pub fn max_relative_energy_increase(&self) -> f64 {
        self.energy
            .windows(2)
            .map(|w| (w[1].e - w[0].e) / w[0].e.abs().max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs `step(n, h)` with `h = dt` until `t_end`, shortening the final step
/// so the run lands exactly on `t_end`. `step` advances the solver state and
/// returns the new density and energy.
pub(crate) fn integrate<F>(
    rho0: &DVector<f64>,
    e0: f64,
    t_end: f64,
    cfl: &CflReport,
    profile_times: &[f64],
    mut step: F,
) -> Result<Trajectory>
where
    F: FnMut(usize, f64) -> Result<(DVector<f64>, f64)>,
{
    let dt = cfl.dt;
    let mut pending: Vec<f64> = profile_times.to_vec();
    pending.sort_by(|a, b| a.total_cmp(b));
    let mut pending = pending.into_iter().peekable();

    let mut snapshots = Vec::new();
    let mut energy = vec![EnergyRecord { step: 0, t: 0.0, e: e0 }];
    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut n = 0;

    let mut capture = |t: f64, n: usize, rho: &DVector<f64>, snapshots: &mut Vec<Snapshot>, last: bool| {
        while let Some(&req) = pending.peek() {
            if t >= req - 1e-12 * req.abs().max(1.0) || last {
                snapshots.push(Snapshot {
                    requested_time: req,
                    time: t,
                    step: n,
                    rho: rho.clone(),
                });
                pending.next();
            } else {
                break;
            }
        }
    };
    capture(t, n, &rho, &mut snapshots, t_end <= 0.0);

    while t < t_end {
        let remaining = t_end - t;
        let last = remaining <= dt * (1.0 + 1e-10);
        let h = if last { remaining } else { dt };
        n += 1;
        let (r, e) = step(n, h)?;
        rho = r;
        t = if last { t_end } else { n as f64 * dt };
        energy.push(EnergyRecord { step: n, t, e });
        capture(t, n, &rho, &mut snapshots, last);
    }

    Ok(Trajectory {
        snapshots,
        energy,
        dt,
        cfl: cfl.clone(),
        steps: n,
        final_time: t,
        final_rho: rho,
        final_g: None,
    })
}
