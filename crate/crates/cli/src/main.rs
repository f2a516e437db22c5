//! `weakforce`: command-line driver for simulations, action minimization, metric and
//! hyperbolic-motion experiments, and the geometry suites.
//!
//! Exit status: 0 on success, 1 when a result is flagged (non-convergence, violations,
//! early halt), 2 on usage or input errors.

mod commands;
mod config;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, Overrides, OUTPUT_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "weakforce",
    version,
    about = "Weak-force N-body toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML problem configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the file and the WEAKFORCE_OUTPUT_DIR variable)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker thread cap
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed for random sampling and restarts
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of bodies N
    #[arg(long, global = true)]
    bodies: Option<usize>,
    /// Spatial dimension n
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Potential exponent, 0 < alpha < 1
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Energy constant E
    #[arg(long, global = true)]
    energy: Option<f64>,
    /// Comma-separated masses
    #[arg(long, global = true, value_delimiter = ',')]
    masses: Option<Vec<f64>>,
    /// Segments of the discrete paths
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Initial paths tried per minimization
    #[arg(long, global = true)]
    restarts: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the equations of motion and write the trajectory
    Simulate(commands::SimulateArgs),
    /// Minimize the action between two configurations
    Minimize(commands::MinimizeArgs),
    /// Estimate the minimal action between two configurations
    Phi(commands::PhiArgs),
    /// Randomized symmetry, triangle and lower-bound checks of the minimal action
    MetricSuite(commands::MetricSuiteArgs),
    /// Chain minimizers to receding targets and report their asymptotics
    Hyperbolic(commands::HyperbolicArgs),
    /// Randomized checks of the norm, ray and perturbation inequalities
    ValidateGeometry(commands::GeometryArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let overrides = Overrides {
        bodies: g.bodies,
        dim: g.dim,
        alpha: g.alpha,
        energy: g.energy,
        masses: g.masses.clone(),
        seed: g.seed,
        output: g.output.clone(),
        threads: g.threads,
        nodes: g.nodes,
        restarts: g.restarts,
    };
    let env_output = std::env::var_os(OUTPUT_ENV).map(PathBuf::from);
    let config = match load_config(g.config.as_deref(), &overrides, env_output) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Simulate(a) => commands::simulate(&config, a),
        Command::Minimize(a) => commands::minimize(&config, a),
        Command::Phi(a) => commands::phi(&config, a),
        Command::MetricSuite(a) => commands::metric_suite(&config, a),
        Command::Hyperbolic(a) => commands::hyperbolic(&config, a),
        Command::ValidateGeometry(a) => commands::validate_geometry(&config, a),
    });
    match result {
        Ok(commands::Status::Success) => ExitCode::SUCCESS,
        Ok(commands::Status::Flagged(reason)) => {
            eprintln!("flagged: {reason}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
