use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kinetic_dlra::bench::{self, SweepParameter};
use kinetic_dlra::config::{SolverConfig, SolverKind};
use kinetic_dlra::Error;

#[derive(Parser)]
#[command(name = "kinetic-dlra", version, about = "Micro-macro P_N and low-rank solvers for 1-D radiative transfer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write profiles, energy trace and metadata.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_solver)]
        solver: Option<SolverKind>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Vary eps or rank and compare every point against a reference solver.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_param)]
        vary: SweepParameter,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Print the time step chosen for a configuration.
    CheckCfl {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_param(s: &str) -> Result<SweepParameter, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn execute(cli: Cli) -> kinetic_dlra::Result<()> {
    match cli.command {
        Command::Run {
            config,
            solver,
            output_dir,
        } => {
            let cfg = SolverConfig::load(&config)?;
            let out = bench::run(&cfg, solver, output_dir.as_deref())?;
            let t = &out.trajectory;
            println!(
                "{} steps, dt = {:e}, final time {}, metadata in {}",
                t.steps,
                t.dt,
                t.final_time,
                out.metadata.display()
            );
        }
        Command::Sweep {
            config,
            vary,
            values,
            output_dir,
        } => {
            let cfg = SolverConfig::load(&config)?;
            let points = bench::sweep(&cfg, vary, &values)?;
            let grid = cfg.build()?.grid;
            let dir = output_dir.unwrap_or_else(|| cfg.output.directory.clone());
            let summary = bench::write_sweep(&dir, &grid, &points)?;
            print!("{}", bench::sweep_csv(&points));
            eprintln!("summary written to {}", summary.display());
        }
        Command::CheckCfl { config } => {
            let cfg = SolverConfig::load(&config)?;
            let problem = cfg.build()?;
            let line = serde_json::to_string(&problem.cfl).map_err(|e| Error::Internal(e.to_string()))?;
            println!("{line}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
