//! Run configuration.
//!
//! The on-disk format is a flat sectioned key-value file (a TOML subset):
//!
//! ```toml
//! [physics]
//! eps = 1.0
//! sigma = 1.0                       # or one value per interface
//! initial = { kind = "plane_source", std = 0.03 }
//!
//! [grid]
//! x_left = -1.5
//! x_right = 1.5
//! nx = 502
//! boundary = "vacuum"
//!
//! [solver]
//! kind = "dlra"
//! moments = 100
//! rank = 20
//! t_end = 1.0
//! cfl_safety = 1.0
//!
//! [output]
//! directory = "out"
//! profile_times = [0.5, 1.0]
//! energy_trace = true
//! ```
//!
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bench::plane_source_initial;
use crate::error::{Error, Result};
use crate::full::{cfl_dt, CflReport};
use crate::grid::{Boundary, FullState, Grid, SigmaField};
use crate::operators::{build_operators, FluxOperators};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub physics: PhysicsConfig,
    pub grid: GridConfig,
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    /// Knudsen number.
    pub eps: f64,
    pub sigma: SigmaSpec,
    pub initial: InitialCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSpec {
    Constant(f64),
    /// One value per interface.
    Tabulated(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    PlaneSource { std: f64 },
    /// `rho` per midpoint, `g` as one row of `N` moments per interface.
    Custom { rho: Vec<f64>, g: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_left: f64,
    pub x_right: f64,
    pub nx: usize,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Full,
    Dlra,
    Diffusion,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SolverKind::Full),
            "dlra" => Ok(SolverKind::Dlra),
            "diffusion" => Ok(SolverKind::Diffusion),
            other => Err(Error::Config(format!("unknown solver '{other}'"))),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Full => "full",
            SolverKind::Dlra => "dlra",
            SolverKind::Diffusion => "diffusion",
        })
    }
}

fn default_safety() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub kind: SolverKind,
    /// Number of microscopic moments `N`.
    pub moments: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub t_end: f64,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
}

fn default_directory() -> PathBuf {
    PathBuf::from("output")
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default)]
    pub profile_times: Vec<f64>,
    #[serde(default = "default_true")]
    pub energy_trace: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_directory(),
            profile_times: Vec::new(),
            energy_trace: true,
        }
    }
}

impl SolverConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SolverConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// The plane-source benchmark on `[-1.5, 1.5]` with `N = 100`,
    /// `Nx = 502`, `sigma = 1` and vacuum boundaries.
    pub fn plane_source(eps: f64, kind: SolverKind, rank: Option<usize>, t_end: f64) -> Self {
        SolverConfig {
            physics: PhysicsConfig {
                eps,
                sigma: SigmaSpec::Constant(1.0),
                initial: InitialCondition::PlaneSource { std: 3e-2 },
            },
            grid: GridConfig {
                x_left: -1.5,
                x_right: 1.5,
                nx: 502,
                boundary: Boundary::Vacuum,
            },
            solver: SolverSection {
                kind,
                moments: 100,
                rank,
                t_end,
                cfl_safety: 1.0,
            },
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let p = &self.physics;
        if !(p.eps.is_finite() && p.eps > 0.0) {
            return bad(format!("physics.eps must be positive, got {}", p.eps));
        }
        match &p.sigma {
            SigmaSpec::Constant(s) if !(s.is_finite() && *s > 0.0) => {
                return bad(format!("physics.sigma must be positive, got {s}"))
            }
            SigmaSpec::Tabulated(v) if v.iter().any(|s| !(s.is_finite() && *s > 0.0)) => {
                return bad("physics.sigma entries must be positive".into())
            }
            _ => {}
        }
        if let InitialCondition::PlaneSource { std } = p.initial {
            if !(std.is_finite() && std > 0.0) {
                return bad(format!("initial std must be positive, got {std}"));
            }
        }
        let s = &self.solver;
        if s.moments == 0 {
            return bad("solver.moments must be at least 1".into());
        }
        if !(s.t_end.is_finite() && s.t_end >= 0.0) {
            return bad(format!("solver.t_end must be non-negative, got {}", s.t_end));
        }
        if !(s.cfl_safety.is_finite() && s.cfl_safety > 0.0) {
            return bad(format!("solver.cfl_safety must be positive, got {}", s.cfl_safety));
        }
        let g = &self.grid;
        if g.nx < 2 || !(g.x_right > g.x_left) {
            return bad("grid must have x_right > x_left and nx >= 2".into());
        }
        if s.kind == SolverKind::Dlra {
            let n_if = match g.boundary {
                Boundary::Periodic => g.nx,
                Boundary::Vacuum => g.nx + 1,
            };
            match s.rank {
                None => return bad("solver.rank is required for the dlra solver".into()),
                Some(r) if r == 0 || r > n_if.min(s.moments) => {
                    return bad(format!(
                        "solver.rank must lie in 1..={}, got {r}",
                        n_if.min(s.moments)
                    ))
                }
                _ => {}
            }
        }
        for &t in &self.output.profile_times {
            if !(t.is_finite() && (0.0..=s.t_end).contains(&t)) {
                return bad(format!("profile time {t} outside [0, t_end]"));
            }
        }
        Ok(())
    }

    /// Discretises the configuration.
    pub fn build(&self) -> Result<Problem> {
        self.validate()?;
        let grid = Grid::new(self.grid.x_left, self.grid.x_right, self.grid.nx, self.grid.boundary)?;
        let ops = build_operators(self.solver.moments)?;
        let sigma = match &self.physics.sigma {
            SigmaSpec::Constant(v) => SigmaField::constant(&grid, *v)?,
            SigmaSpec::Tabulated(v) => {
                if v.len() != grid.n_interfaces() {
                    return Err(Error::Config(format!(
                        "tabulated sigma needs {} interface values, got {}",
                        grid.n_interfaces(),
                        v.len()
                    )));
                }
                SigmaField::new(v.clone())?
            }
        };
        let initial = match &self.physics.initial {
            InitialCondition::PlaneSource { std } => plane_source_initial(&grid, ops.n, *std)?,
            InitialCondition::Custom { rho, g } => {
                if rho.len() != grid.nx || g.len() != grid.n_interfaces() || g.iter().any(|row| row.len() != ops.n) {
                    return Err(Error::Config(format!(
                        "custom initial data must have {} rho values and {} rows of {} moments",
                        grid.nx,
                        grid.n_interfaces(),
                        ops.n
                    )));
                }
                let gm = DMatrix::from_fn(grid.n_interfaces(), ops.n, |i, k| g[i][k]);
                FullState::new(DVector::from_column_slice(rho), gm, 0.0)
                    .map_err(|e| Error::Config(e.to_string()))?
            }
        };
        let eps = self.physics.eps;
        let cfl = cfl_dt(&ops.quad, ops.n, eps, grid.dx, sigma.sigma0, self.solver.cfl_safety)?;
        Ok(Problem {
            grid,
            ops,
            sigma,
            initial,
            eps,
            t_end: self.solver.t_end,
            rank: self.solver.rank,
            cfl,
            profile_times: self.output.profile_times.clone(),
        })
    }
}

/// A discretised, ready-to-run configuration.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid,
    pub ops: FluxOperators,
    pub sigma: SigmaField,
    pub initial: FullState,
    pub eps: f64,
    pub t_end: f64,
    pub rank: Option<usize>,
    pub cfl: CflReport,
    pub profile_times: Vec<f64>,
}
