//! Plane-source benchmark, run orchestration, comparison metrics and file
//! output.
//!
//! A run directory contains
//!
//! - `profile_NNN.csv` per requested output time and `profile_final.csv`,
//!   header `x,rho`, 17 significant digits;
//! - `energy.csv`, header `step,t,e,delta_e`, one row per step;
//! - `metadata.txt`, `key = value` lines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Problem, SolverConfig, SolverKind};
use crate::diffusion::run_diffusion_problem;
use crate::dlra::run_dlra_problem;
use crate::error::{Error, Result};
use crate::full::run_full_problem;
use crate::grid::{FullState, Grid};
use crate::trajectory::{EnergyRecord, Trajectory};

/// Unit-mass Gaussian `exp(-x^2 / (2 std^2)) / (sqrt(2 pi) std)`.
pub fn plane_source_density(x: f64, std: f64) -> f64 {
    (-x * x / (2.0 * std * std)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * std)
}

/// Isotropic Gaussian pulse: `rho` is the Gaussian at the midpoints and
/// `g = 0`.
pub fn plane_source_initial(grid: &Grid, n_moments: usize, std: f64) -> Result<FullState> {
    if !(std.is_finite() && std > 0.0) {
        return Err(Error::InvalidArgument(format!("std must be positive, got {std}")));
    }
    let rho = DVector::from_iterator(grid.nx, grid.midpoints().into_iter().map(|x| plane_source_density(x, std)));
    Ok(FullState {
        rho,
        g: DMatrix::zeros(grid.n_interfaces(), n_moments),
        time: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonResult {
    /// `||a - b|| / ||b||` in the dx-weighted L2 norm.
    pub rel_l2: f64,
    pub linf: f64,
    /// `max_n (e_a^n - e_b^n)` when both energy traces share their time grid.
    pub energy_gap: Option<f64>,
    /// `max_n |e_a^n - e_b^n| / |e_b^n|` on the same condition.
    pub energy_rel_gap: Option<f64>,
}

/// Compares profile `a` against reference `b`.
pub fn compare(a: &DVector<f64>, b: &DVector<f64>, grid: &Grid) -> Result<ComparisonResult> {
    if a.len() != grid.nx || b.len() != grid.nx {
        return Err(Error::shape("compare", grid.nx, format!("{} and {}", a.len(), b.len())));
    }
    let diff = a - b;
    let num = grid.norm2_midpoints(&diff).sqrt();
    let den = grid.norm2_midpoints(b).sqrt();
    let rel_l2 = if num == 0.0 { 0.0 } else { num / den };
    Ok(ComparisonResult {
        rel_l2,
        linf: diff.amax(),
        energy_gap: None,
        energy_rel_gap: None,
    })
}

/// Compares final profiles and, when the step times agree, energy traces.
pub fn compare_runs(a: &Trajectory, b: &Trajectory, grid: &Grid) -> Result<ComparisonResult> {
    let mut out = compare(&a.final_rho, &b.final_rho, grid)?;
    let aligned = a.energy.len() == b.energy.len()
        && a.energy.iter().zip(&b.energy).all(|(x, y)| (x.t - y.t).abs() <= 1e-12 * y.t.abs().max(1.0));
    if aligned {
        let pairs = || a.energy.iter().zip(&b.energy);
        out.energy_gap = Some(pairs().map(|(x, y)| x.e - y.e).fold(f64::NEG_INFINITY, f64::max));
        out.energy_rel_gap = Some(
            pairs()
                .map(|(x, y)| (x.e - y.e).abs() / y.e.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max),
        );
    }
    Ok(out)
}

/// Runs the solver selected in the problem's configuration.
pub fn solve(problem: &Problem, kind: SolverKind) -> Result<Trajectory> {
    match kind {
        SolverKind::Full => run_full_problem(problem),
        SolverKind::Dlra => run_dlra_problem(problem),
        SolverKind::Diffusion => run_diffusion_problem(problem),
    }
}

/// Everything a run wrote.
#[derive(Debug)]
pub struct RunArtifacts {
    pub trajectory: Trajectory,
    pub grid: Grid,
    pub profiles: Vec<PathBuf>,
    pub energy: Option<PathBuf>,
    pub metadata: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(io_err(path))
}

pub fn profile_csv(grid: &Grid, rho: &DVector<f64>) -> String {
    let mut s = String::from("x,rho\n");
    for (x, r) in grid.midpoints().iter().zip(rho.iter()) {
        let _ = writeln!(s, "{x:.16e},{r:.16e}");
    }
    s
}

pub fn energy_csv(trace: &[EnergyRecord]) -> String {
    let mut s = String::from("step,t,e,delta_e\n");
    let mut prev = trace.first().map(|r| r.e).unwrap_or(0.0);
    for r in trace {
        let _ = writeln!(s, "{},{:.16e},{:.16e},{:.16e}", r.step, r.t, r.e, r.e - prev);
        prev = r.e;
    }
    s
}

fn parse_f64(field: &str, path: &Path, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{}:{line}: bad number '{field}'", path.display())))
}

/// Reads a `x,rho` profile CSV.
pub fn read_profile_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    if lines.next() != Some("x,rho") {
        return Err(Error::InvalidArgument(format!("{}: expected header x,rho", path.display())));
    }
    let (mut xs, mut rhos) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let mut it = line.split(',');
        let (Some(x), Some(r), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::InvalidArgument(format!("{}:{}: expected 2 fields", path.display(), i + 2)));
        };
        xs.push(parse_f64(x, path, i + 2)?);
        rhos.push(parse_f64(r, path, i + 2)?);
    }
    Ok((xs, rhos))
}

/// Reads a `step,t,e,delta_e` energy CSV.
pub fn read_energy_csv(path: &Path) -> Result<Vec<(usize, f64, f64, f64)>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    if lines.next() != Some("step,t,e,delta_e") {
        return Err(Error::InvalidArgument(format!(
            "{}: expected header step,t,e,delta_e",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::InvalidArgument(format!("{}:{}: expected 4 fields", path.display(), i + 2)));
        }
        let step = f[0]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{}:{}: bad step", path.display(), i + 2)))?;
        rows.push((step, parse_f64(f[1], path, i + 2)?, parse_f64(f[2], path, i + 2)?, parse_f64(f[3], path, i + 2)?));
    }
    Ok(rows)
}

fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

fn metadata_text(
    config: &SolverConfig,
    kind: SolverKind,
    problem: &Problem,
    result: &Result<Trajectory>,
    wall: f64,
) -> String {
    let mut m = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(m, "{k} = {v}");
    };
    kv("solver", kind.to_string());
    kv("version", version_string());
    kv(
        "status",
        match result {
            Ok(_) => "ok".into(),
            Err(e) => format!("failed: {e}"),
        },
    );
    kv("eps", format!("{:e}", config.physics.eps));
    kv("x_left", format!("{}", config.grid.x_left));
    kv("x_right", format!("{}", config.grid.x_right));
    kv("nx", config.grid.nx.to_string());
    kv("boundary", format!("{:?}", config.grid.boundary).to_lowercase());
    kv("moments", config.solver.moments.to_string());
    kv("rank", config.solver.rank.map_or("none".into(), |r| r.to_string()));
    kv("t_end", format!("{}", config.solver.t_end));
    kv("sigma0", format!("{:e}", problem.sigma.sigma0));
    let cfl = match result {
        Ok(t) => t.cfl.clone(),
        Err(_) => problem.cfl.clone(),
    };
    kv("dt", format!("{:.16e}", cfl.dt));
    kv("cfl_safety", format!("{}", cfl.safety));
    kv("cfl_minimizing_k", cfl.minimizing_k.to_string());
    kv("cfl_mu", format!("{:.16e}", cfl.mu_min));
    kv("cfl_w", format!("{:.16e}", cfl.w_min));
    kv("cfl_hyperbolic_part", format!("{:.16e}", cfl.hyperbolic_part));
    kv("cfl_parabolic_part", format!("{:.16e}", cfl.parabolic_part));
    if let Ok(t) = result {
        kv("steps", t.steps.to_string());
        kv("final_time", format!("{:.16e}", t.final_time));
        for (i, s) in t.snapshots.iter().enumerate() {
            kv(
                &format!("profile_{i:03}"),
                format!("requested {:.16e} actual {:.16e} step {}", s.requested_time, s.time, s.step),
            );
        }
    }
    if let Err(Error::NonFinite { step, operator }) = result {
        kv("failed_step", step.to_string());
        kv("failed_operator", operator.to_string());
    }
    kv("wall_time_s", format!("{wall:.3}"));
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    kv("timestamp", stamp.to_string());
    m
}

/// Runs `config` (optionally overriding the solver and output directory)
/// and writes profiles, energy trace and metadata.
pub fn run(config: &SolverConfig, solver: Option<SolverKind>, output_dir: Option<&Path>) -> Result<RunArtifacts> {
    let mut config = config.clone();
    let kind = solver.unwrap_or(config.solver.kind);
    config.solver.kind = kind;
    let dir = output_dir.map(Path::to_path_buf).unwrap_or_else(|| config.output.directory.clone());
    let problem = config.build()?;
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    let start = Instant::now();
    let result = solve(&problem, kind);
    let wall = start.elapsed().as_secs_f64();

    let metadata = dir.join("metadata.txt");
    write_file(&metadata, &metadata_text(&config, kind, &problem, &result, wall))?;
    let trajectory = result?;

    let mut profiles = Vec::new();
    for (i, snap) in trajectory.snapshots.iter().enumerate() {
        let path = dir.join(format!("profile_{i:03}.csv"));
        write_file(&path, &profile_csv(&problem.grid, &snap.rho))?;
        profiles.push(path);
    }
    let final_path = dir.join("profile_final.csv");
    write_file(&final_path, &profile_csv(&problem.grid, &trajectory.final_rho))?;
    profiles.push(final_path);

    let energy = if config.output.energy_trace {
        let path = dir.join("energy.csv");
        write_file(&path, &energy_csv(&trajectory.energy))?;
        Some(path)
    } else {
        None
    };

    Ok(RunArtifacts {
        trajectory,
        grid: problem.grid,
        profiles,
        energy,
        metadata,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Eps,
    Rank,
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eps" => Ok(SweepParameter::Eps),
            "rank" => Ok(SweepParameter::Rank),
            other => Err(Error::Config(format!("cannot vary '{other}' (expected eps or rank)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub dt: f64,
    pub hyperbolic_part: f64,
    pub parabolic_part: f64,
    /// Comparison against the reference solver, or the failure message.
    pub outcome: std::result::Result<ComparisonResult, String>,
    pub final_rho: Option<DVector<f64>>,
}

/// Reference solver for a sweep point: the full-rank scheme, or the
/// diffusion limit when the full-rank scheme itself is being swept.
pub fn reference_solver(kind: SolverKind) -> SolverKind {
    match kind {
        SolverKind::Full => SolverKind::Diffusion,
        _ => SolverKind::Full,
    }
}

fn point_config(base: &SolverConfig, param: SweepParameter, value: f64) -> Result<SolverConfig> {
    let mut cfg = base.clone();
    match param {
        SweepParameter::Eps => cfg.physics.eps = value,
        SweepParameter::Rank => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::Config(format!("rank must be a positive integer, got {value}")));
            }
            cfg.solver.rank = Some(value as usize);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one point per value concurrently and compares each against the
/// reference solver. Failures are recorded per point.
pub fn sweep(base: &SolverConfig, param: SweepParameter, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    if param == SweepParameter::Rank && base.solver.kind != SolverKind::Dlra {
        return Err(Error::Config("a rank sweep needs solver kind dlra".into()));
    }
    let kind = base.solver.kind;
    let ref_kind = reference_solver(kind);

    // the reference does not depend on the rank
    let shared_reference = match param {
        SweepParameter::Rank => {
            let problem = base.build()?;
            Some(solve(&problem, ref_kind).map_err(|e| e.to_string()))
        }
        SweepParameter::Eps => None,
    };

    let points = values
        .par_iter()
        .map(|&value| {
            let cfg = match point_config(base, param, value) {
                Ok(c) => c,
                Err(e) => {
                    return SweepPoint {
                        value,
                        dt: f64::NAN,
                        hyperbolic_part: f64::NAN,
                        parabolic_part: f64::NAN,
                        outcome: Err(e.to_string()),
                        final_rho: None,
                    }
                }
            };
            let problem = match cfg.build() {
                Ok(p) => p,
                Err(e) => {
                    return SweepPoint {
                        value,
                        dt: f64::NAN,
                        hyperbolic_part: f64::NAN,
                        parabolic_part: f64::NAN,
                        outcome: Err(e.to_string()),
                        final_rho: None,
                    }
                }
            };
            let mut final_rho = None;
            let outcome = (|| {
                let run = solve(&problem, kind).map_err(|e| e.to_string())?;
                final_rho = Some(run.final_rho.clone());
                let reference = match &shared_reference {
                    Some(r) => r.clone()?,
                    None => solve(&problem, ref_kind).map_err(|e| e.to_string())?,
                };
                compare_runs(&run, &reference, &problem.grid).map_err(|e| e.to_string())
            })();
            SweepPoint {
                value,
                dt: problem.cfl.dt,
                hyperbolic_part: problem.cfl.hyperbolic_part,
                parabolic_part: problem.cfl.parabolic_part,
                outcome,
                final_rho,
            }
        })
        .collect();
    Ok(points)
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("value,dt,hyperbolic_part,parabolic_part,rel_l2,linf,energy_gap,status\n");
    for p in points {
        let _ = write!(s, "{:.16e},{:.16e},{:.16e},{:.16e},", p.value, p.dt, p.hyperbolic_part, p.parabolic_part);
        match &p.outcome {
            Ok(c) => {
                let gap = c.energy_gap.map_or("nan".to_string(), |g| format!("{g:.16e}"));
                let _ = writeln!(s, "{:.16e},{:.16e},{gap},ok", c.rel_l2, c.linf);
            }
            Err(e) => {
                let _ = writeln!(s, "nan,nan,nan,\"failed: {}\"", e.replace('"', "'"));
            }
        }
    }
    s
}

/// Writes `sweep.csv` and one `point_NNN_profile.csv` per successful point
/// into `dir`; returns the summary path.
pub fn write_sweep(dir: &Path, grid: &Grid, points: &[SweepPoint]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (i, p) in points.iter().enumerate() {
        if let Some(rho) = &p.final_rho {
            write_file(&dir.join(format!("point_{i:03}_profile.csv")), &profile_csv(grid, rho))?;
        }
    }
    let summary = dir.join("sweep.csv");
    write_file(&summary, &sweep_csv(points))?;
    Ok(summary)
}
