use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use weakforce::action::{maupertuis_bound, minimize_fixed_time, minimize_free_time, MinimizeResult};
use weakforce::dynamics::{circular_two_body, integrate, IntegrationStatus, PhasePoint};
use weakforce::geometry::{run_suite, Suite, ViolationReport};
use weakforce::hyperbolic::{
    asymptotic_report, construct, AsymptoticReport, HyperbolicSettings, RadiiSchedule, TargetMode,
};
use weakforce::io::{read_configurations, write_path, write_trajectory};
use weakforce::metric::{self, check_positivity_bound, MetricSuiteConfig};
use weakforce::space::{normalize_to_sphere, Configuration};

use crate::config::ProblemConfig;
use crate::presets;

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] weakforce::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

type Result<T> = std::result::Result<T, CommandError>;

pub enum Status {
    Success,
    Flagged(String),
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(config: &ProblemConfig, name: &str) -> Result<(BufWriter<File>, PathBuf)> {
    std::fs::create_dir_all(&config.output).map_err(io_error(&config.output))?;
    let path = config.output.join(name);
    let file = File::create(&path).map_err(io_error(&path))?;
    Ok((BufWriter::new(file), path))
}

fn write_json<T: Serialize>(config: &ProblemConfig, name: &str, value: &T) -> Result<String> {
    let text = serde_json::to_string_pretty(value).expect("serializable report") + "\n";
    let (mut w, path) = create(config, name)?;
    w.write_all(text.as_bytes()).map_err(io_error(&path))?;
    w.flush().map_err(io_error(&path))?;
    Ok(text)
}

fn read_configs(path: &Path, config: &ProblemConfig) -> Result<Vec<Configuration>> {
    let file = File::open(path).map_err(io_error(path))?;
    let configs = read_configurations(BufReader::new(file))?;
    if configs.is_empty() {
        return Err(CommandError::Usage(format!("{}: no configurations", path.display())));
    }
    for c in &configs {
        if c.bodies() != config.bodies || c.dim() != config.dim {
            return Err(CommandError::Usage(format!(
                "{}: configuration is {}x{} but the problem has N = {}, n = {}",
                path.display(),
                c.bodies(),
                c.dim(),
                config.bodies,
                config.dim
            )));
        }
    }
    Ok(configs)
}

fn read_one(path: &Path, config: &ProblemConfig) -> Result<Configuration> {
    Ok(read_configs(path, config)?.swap_remove(0))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    /// Two bodies on a circular relative orbit of unit separation
    Circular,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, conflicts_with = "initial")]
    preset: Option<Preset>,
    /// CSV with two rows: positions, then velocities
    #[arg(long)]
    initial: Option<PathBuf>,
    /// Integration time (defaults to `periods` orbital periods for the preset)
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    periods: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    status: IntegrationStatus,
    steps: usize,
    rejected_steps: usize,
    end_time: f64,
    period: Option<f64>,
    max_energy_drift: f64,
    max_momentum_drift: f64,
    max_angular_momentum_drift: f64,
}

pub fn simulate(config: &ProblemConfig, args: &SimulateArgs) -> Result<Status> {
    let p = config.params();
    let (start, period) = match &args.initial {
        Some(path) => {
            let rows = read_configs(path, config)?;
            if rows.len() != 2 {
                return Err(CommandError::Usage(format!(
                    "{}: expected two rows (positions, velocities), found {}",
                    path.display(),
                    rows.len()
                )));
            }
            let mut rows = rows.into_iter();
            let x = rows.next().expect("two rows");
            let v = rows.next().expect("two rows");
            (PhasePoint::new(x, v)?, None)
        }
        None => {
            if config.bodies != 2 {
                return Err(CommandError::Usage("the circular preset needs N = 2".into()));
            }
            let (s, period) = circular_two_body(&p, 1.0, config.dim)?;
            (s, Some(period))
        }
    };
    let duration = match (args.duration, period) {
        (Some(d), _) => d,
        (None, Some(period)) => args.periods * period,
        (None, None) => return Err(CommandError::Usage("--duration is required with --initial".into())),
    };
    let traj = integrate(&start, &p, duration, &config.integration)?;
    let (w, path) = create(config, "simulate.csv")?;
    write_trajectory(w, &p, &traj, true)?;
    let report = SimulateReport {
        status: traj.status,
        steps: traj.times.len() - 1,
        rejected_steps: traj.rejected_steps,
        end_time: traj.end_time(),
        period,
        max_energy_drift: traj.max_energy_drift(),
        max_momentum_drift: traj.max_momentum_drift(&p),
        max_angular_momentum_drift: traj.max_angular_momentum_drift(&p),
    };
    print!("{}", write_json(config, "simulate.json", &report)?);
    eprintln!("trajectory written to {}", path.display());
    Ok(if traj.completed() {
        Status::Success
    } else {
        Status::Flagged(format!("integration stopped early: {:?}", traj.status))
    })
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    /// CSV holding the start configuration (first row)
    #[arg(long)]
    from: PathBuf,
    /// CSV holding the end configuration (first row)
    #[arg(long)]
    to: PathBuf,
    /// Minimize over the total time as well (default)
    #[arg(long, conflicts_with = "fixed_time")]
    free_time: bool,
    /// Keep the total time fixed at T
    #[arg(long, value_name = "T")]
    fixed_time: Option<f64>,
}

#[derive(Serialize)]
struct MinimizeReport {
    mode: &'static str,
    converged: bool,
    degenerate: bool,
    nodes: usize,
    duration: f64,
    action: f64,
    kinetic: f64,
    potential: f64,
    energy_term: f64,
    grad_norm: f64,
    duration_derivative: f64,
    energy_error: f64,
    transversal: bool,
    min_sep: f64,
    el_residual: f64,
    discretization_error: f64,
    iterations: usize,
    restart: usize,
    maupertuis_bound: f64,
}

fn minimize_report(
    config: &ProblemConfig,
    x: &Configuration,
    y: &Configuration,
    r: &MinimizeResult,
) -> Result<MinimizeReport> {
    Ok(MinimizeReport {
        mode: if r.free_time { "free-time" } else { "fixed-time" },
        converged: r.converged,
        degenerate: r.degenerate,
        nodes: r.path.segments(),
        duration: r.duration(),
        action: r.action.value,
        kinetic: r.action.kinetic,
        potential: r.action.potential,
        energy_term: r.action.energy_term,
        grad_norm: r.grad_norm,
        duration_derivative: r.duration_derivative,
        energy_error: r.energy_error,
        transversal: r.transversal(config.energy, config.minimize.energy_tol),
        min_sep: r.min_sep,
        el_residual: r.el_residual,
        discretization_error: r.discretization_error,
        iterations: r.iterations,
        restart: r.restart,
        maupertuis_bound: maupertuis_bound(x, y, config.energy, &config.masses)?,
    })
}

pub fn minimize(config: &ProblemConfig, args: &MinimizeArgs) -> Result<Status> {
    let p = config.params();
    let x = read_one(&args.from, config)?;
    let y = read_one(&args.to, config)?;
    let result = match args.fixed_time {
        Some(t) => minimize_fixed_time(&x, &y, t, None, config.energy, &p, &config.minimize)?,
        None => minimize_free_time(&x, &y, config.energy, &p, &config.minimize)?,
    };
    let (w, _) = create(config, "minimize_path.csv")?;
    write_path(w, &p, &result.path, result.free_time.then_some(config.energy))?;
    let report = minimize_report(config, &x, &y, &result)?;
    print!("{}", write_json(config, "minimize.json", &report)?);
    Ok(if result.converged {
        Status::Success
    } else {
        Status::Flagged("minimizer did not converge".into())
    })
}

#[derive(Debug, Args)]
pub struct PhiArgs {
    #[arg(long)]
    from: PathBuf,
    #[arg(long)]
    to: PathBuf,
}

#[derive(Serialize)]
struct PhiReport {
    phi: f64,
    tolerance: f64,
    converged: bool,
    degenerate: bool,
    restarts: usize,
    duration: f64,
    maupertuis_bound: f64,
    positivity_bound: f64,
    min_sep: f64,
    energy_error: f64,
}

pub fn phi(config: &ProblemConfig, args: &PhiArgs) -> Result<Status> {
    let p = config.params();
    let x = read_one(&args.from, config)?;
    let y = read_one(&args.to, config)?;
    let est = metric::phi_estimate(&x, &y, config.energy, &p, &config.minimize)?;
    let report = PhiReport {
        phi: est.value,
        tolerance: est.tolerance(),
        converged: est.converged,
        degenerate: est.degenerate,
        restarts: est.restarts,
        duration: est.result.duration(),
        maupertuis_bound: maupertuis_bound(&x, &y, config.energy, &config.masses)?,
        positivity_bound: check_positivity_bound(&x, &y, &est.result)?.bound,
        min_sep: est.result.min_sep,
        energy_error: est.result.energy_error,
    };
    print!("{}", write_json(config, "phi.json", &report)?);
    Ok(if est.converged {
        Status::Success
    } else {
        Status::Flagged("phi estimate did not converge".into())
    })
}

#[derive(Debug, Args)]
pub struct MetricSuiteArgs {
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    #[arg(long, default_value_t = 25)]
    triples: usize,
    /// Standard deviation of the random body positions
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    /// Minimum pairwise distance of samples, relative to the spread
    #[arg(long, default_value_t = 0.3)]
    min_separation: f64,
}

#[derive(Serialize)]
struct MetricSummary {
    pairs: usize,
    triples: usize,
    symmetry_violations: usize,
    triangle_violations: usize,
    lower_bound_violations: usize,
    unconverged: usize,
    worst_symmetry_ratio: f64,
    worst_triangle_ratio: f64,
    min_sep: f64,
    replay_seeds: Vec<u64>,
}

pub fn metric_suite(config: &ProblemConfig, args: &MetricSuiteArgs) -> Result<Status> {
    let p = config.params();
    let suite = MetricSuiteConfig {
        dim: config.dim,
        pairs: args.pairs,
        triples: args.triples,
        energy: config.energy,
        spread: args.spread,
        min_separation: args.min_separation,
        seed: config.seed,
    };
    let report = metric::metric_suite(&suite, &p, &config.minimize)?;
    write_json(config, "metric_suite.json", &report)?;
    let summary = MetricSummary {
        pairs: report.pairs.len(),
        triples: report.triples.len(),
        symmetry_violations: report.symmetry_violations,
        triangle_violations: report.triangle_violations,
        lower_bound_violations: report.lower_bound_violations,
        unconverged: report.unconverged,
        worst_symmetry_ratio: report.worst_symmetry_ratio,
        worst_triangle_ratio: report.worst_triangle_ratio,
        min_sep: report.min_sep,
        replay_seeds: report.replay_seeds.clone(),
    };
    print!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("serializable") + "\n"
    );
    Ok(if report.violations() > 0 {
        Status::Flagged(format!("{} metric violations", report.violations()))
    } else if report.unconverged > 0 {
        Status::Flagged(format!("{} samples did not converge", report.unconverged))
    } else {
        Status::Success
    })
}

#[derive(Debug, Args)]
pub struct HyperbolicArgs {
    /// Limit shape: a preset name (polygon, collinear) or a configuration CSV
    #[arg(long, default_value = "polygon")]
    shape: String,
    /// Start configuration CSV (default: the shape turned a quarter turn)
    #[arg(long)]
    from: Option<PathBuf>,
    /// Comma-separated target radii (default: geometric schedule)
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Number of legs of the geometric schedule
    #[arg(long, default_value_t = 5)]
    legs: usize,
    /// Ratio of the geometric schedule
    #[arg(long, default_value_t = 2.0)]
    ratio: f64,
    /// Target time step of the discretization
    #[arg(long, default_value_t = 0.025)]
    time_step: f64,
    /// Aim at x0 + R a instead of R a
    #[arg(long)]
    offset: bool,
}

#[derive(Serialize)]
struct HyperbolicOutput<'a> {
    complete: bool,
    radii: &'a [f64],
    report: &'a AsymptoticReport,
}

pub fn hyperbolic(config: &ProblemConfig, args: &HyperbolicArgs) -> Result<Status> {
    let p = config.params();
    let raw_shape = match presets::shape(&args.shape, config.bodies, config.dim) {
        Some(c) => c,
        None if Path::new(&args.shape).is_file() => read_one(Path::new(&args.shape), config)?,
        None => {
            return Err(CommandError::Usage(format!(
                "unknown shape `{}`: expected one of {} or a configuration file",
                args.shape,
                presets::SHAPES.join(", ")
            )))
        }
    };
    let a = normalize_to_sphere(&raw_shape, &config.masses)?;
    let x0 = match &args.from {
        Some(path) => read_one(path, config)?,
        None => presets::quarter_turn(&raw_shape),
    };
    let schedule = match &args.radii {
        Some(r) => RadiiSchedule::Explicit(r.clone()),
        None => RadiiSchedule::Geometric {
            first: None,
            ratio: args.ratio,
            legs: args.legs,
        },
    };
    let settings = HyperbolicSettings {
        minimize: config.minimize.clone(),
        time_step: args.time_step,
        target: if args.offset {
            TargetMode::Offset
        } else {
            TargetMode::Scaled
        },
        ..Default::default()
    };
    let run = construct(&x0, &a, config.energy, &schedule, &p, &settings)?;
    for (k, leg) in run.legs.iter().enumerate() {
        let (w, _) = create(config, &format!("leg_{}.csv", k + 1))?;
        write_path(w, &p, &leg.path, Some(config.energy))?;
    }
    let report = asymptotic_report(&run, &p)?;
    let out = HyperbolicOutput {
        complete: run.complete,
        radii: &run.radii,
        report: &report,
    };
    print!("{}", write_json(config, "hyperbolic.json", &out)?);
    Ok(if run.complete {
        Status::Success
    } else {
        Status::Flagged(format!("leg {} did not converge", run.legs.len()))
    })
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteChoice {
    Lemma,
    Ray,
    Perturbation,
    All,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    /// Samples per suite and family
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = SuiteChoice::All)]
    suite: SuiteChoice,
    /// Comma-separated `NxN` families, e.g. `3x2` for three bodies in the plane
    #[arg(long, value_delimiter = ',', default_value = "2x2,2x3,3x2,3x3,5x2,5x3")]
    families: Vec<String>,
}

#[derive(Serialize)]
struct GeometryOutput {
    seed: u64,
    samples: usize,
    total_violations: usize,
    reports: Vec<ViolationReport>,
}

fn parse_family(s: &str) -> Result<(usize, usize)> {
    s.split_once('x')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
        .ok_or_else(|| CommandError::Usage(format!("bad family `{s}`, expected e.g. 3x2")))
}

pub fn validate_geometry(config: &ProblemConfig, args: &GeometryArgs) -> Result<Status> {
    let suites: Vec<Suite> = match args.suite {
        SuiteChoice::Lemma => vec![Suite::Lemma],
        SuiteChoice::Ray => vec![Suite::Ray],
        SuiteChoice::Perturbation => vec![Suite::Perturbation],
        SuiteChoice::All => Suite::ALL.to_vec(),
    };
    let families = args
        .families
        .iter()
        .map(|f| parse_family(f))
        .collect::<Result<Vec<_>>>()?;
    let mut reports = Vec::new();
    for &(bodies, dim) in &families {
        for &suite in &suites {
            reports.push(run_suite(suite, bodies, dim, args.samples, config.seed)?);
        }
    }
    let total_violations = reports.iter().map(|r| r.violations).sum();
    let out = GeometryOutput {
        seed: config.seed,
        samples: args.samples,
        total_violations,
        reports,
    };
    print!("{}", write_json(config, "geometry.json", &out)?);
    Ok(if total_violations > 0 {
        Status::Flagged(format!("{total_violations} geometry violations"))
    } else {
        Status::Success
    })
}
