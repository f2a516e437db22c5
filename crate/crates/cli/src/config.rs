//! Problem configuration: a flat TOML file, overridden by command-line flags.
//!
//! Recognized keys (all optional):
//!
//! | key            | default            |
//! |----------------|--------------------|
//! | `N`            | `len(masses)` or 2 |
//! | `n`            | 2                  |
//! | `alpha`        | 0.5                |
//! | `E`            | 1.0                |
//! | `masses`       | all ones           |
//! | `seed`         | 0                  |
//! | `output`       | `out`              |
//! | `threads`      | rayon default      |
//! | `nodes`        | 200                |
//! | `restarts`     | 1                  |
//! | `grad_tol`     | 1e-8               |
//! | `energy_tol`   | 1e-3               |
//! | `duration_tol` | 1e-7               |
//! | `time_floor`   | 1e-4               |
//! | `max_iterations` | 20000            |
//! | `rtol`, `atol` | 1e-12              |
//!
//! The output directory can also be set through `WEAKFORCE_OUTPUT_DIR`; the `--output`
//! flag wins over the variable, which wins over the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use weakforce::action::MinimizeSettings;
use weakforce::dynamics::{PotentialParams, ToleranceSettings};
use weakforce::space::MassVector;

pub const OUTPUT_ENV: &str = "WEAKFORCE_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "N")]
    bodies: Option<usize>,
    #[serde(rename = "n")]
    dim: Option<usize>,
    alpha: Option<f64>,
    #[serde(rename = "E")]
    energy: Option<f64>,
    masses: Option<Vec<f64>>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    threads: Option<usize>,
    nodes: Option<usize>,
    restarts: Option<usize>,
    grad_tol: Option<f64>,
    energy_tol: Option<f64>,
    duration_tol: Option<f64>,
    time_floor: Option<f64>,
    max_iterations: Option<usize>,
    rtol: Option<f64>,
    atol: Option<f64>,
}

/// Values given on the command line; `None` leaves the file value in place.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub bodies: Option<usize>,
    pub dim: Option<usize>,
    pub alpha: Option<f64>,
    pub energy: Option<f64>,
    pub masses: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub nodes: Option<usize>,
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub bodies: usize,
    pub dim: usize,
    pub alpha: f64,
    pub energy: f64,
    pub masses: MassVector,
    pub seed: u64,
    pub output: PathBuf,
    pub threads: Option<usize>,
    pub minimize: MinimizeSettings,
    pub integration: ToleranceSettings,
}

impl ProblemConfig {
    pub fn params(&self) -> PotentialParams {
        PotentialParams::new(self.alpha, self.masses.clone()).expect("validated at load time")
    }
}

fn positive(name: &str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::Invalid(format!("{name} must be positive, got {value}")))
    }
}

fn read_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text).map_err(|message| ConfigError::Parse {
        path: path.to_path_buf(),
        message,
    })
}

fn parse(text: &str) -> Result<FileConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string().trim_end().to_string())
}

/// Reads `path` (if any), applies the environment and `flags`, and validates the result.
pub fn load_config(
    path: Option<&Path>,
    flags: &Overrides,
    env_output: Option<PathBuf>,
) -> Result<ProblemConfig, ConfigError> {
    let file = match path {
        Some(p) => read_file(p)?,
        None => FileConfig::default(),
    };
    resolve(file, flags, env_output)
}

fn resolve(file: FileConfig, flags: &Overrides, env_output: Option<PathBuf>) -> Result<ProblemConfig, ConfigError> {
    let masses_raw = flags.masses.clone().or(file.masses);
    let bodies = flags
        .bodies
        .or(file.bodies)
        .or(masses_raw.as_ref().map(Vec::len))
        .unwrap_or(2);
    if bodies < 2 {
        return Err(ConfigError::Invalid(format!("N must be at least 2, got {bodies}")));
    }
    let dim = flags.dim.or(file.dim).unwrap_or(2);
    if dim < 2 {
        return Err(ConfigError::Invalid(format!("n must be at least 2, got {dim}")));
    }
    let masses_raw = masses_raw.unwrap_or_else(|| vec![1.0; bodies]);
    if masses_raw.len() != bodies {
        return Err(ConfigError::Invalid(format!(
            "masses has {} entries but N = {bodies}",
            masses_raw.len()
        )));
    }
    let masses = MassVector::new(masses_raw).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let alpha = flags.alpha.or(file.alpha).unwrap_or(0.5);
    PotentialParams::new(alpha, masses.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let energy = flags.energy.or(file.energy).unwrap_or(1.0);
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(ConfigError::Invalid(format!("E must be positive, got {energy}")));
    }
    let seed = flags.seed.or(file.seed).unwrap_or(0);
    let output = flags
        .output
        .clone()
        .or(env_output)
        .or(file.output)
        .unwrap_or_else(|| PathBuf::from("out"));
    let threads = flags.threads.or(file.threads);
    if threads == Some(0) {
        return Err(ConfigError::Invalid("threads must be positive".into()));
    }

    let defaults = MinimizeSettings::default();
    let minimize = MinimizeSettings {
        nodes: flags.nodes.or(file.nodes).unwrap_or(defaults.nodes),
        restarts: flags.restarts.or(file.restarts).unwrap_or(defaults.restarts),
        grad_tol: positive("grad_tol", file.grad_tol.unwrap_or(defaults.grad_tol))?,
        energy_tol: positive("energy_tol", file.energy_tol.unwrap_or(defaults.energy_tol))?,
        duration_tol: positive("duration_tol", file.duration_tol.unwrap_or(defaults.duration_tol))?,
        time_floor: positive("time_floor", file.time_floor.unwrap_or(defaults.time_floor))?,
        max_iterations: file.max_iterations.unwrap_or(defaults.max_iterations),
        seed,
        ..defaults
    };
    minimize.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let tol = ToleranceSettings::default();
    let integration = ToleranceSettings {
        rtol: positive("rtol", file.rtol.unwrap_or(tol.rtol))?,
        atol: positive("atol", file.atol.unwrap_or(tol.atol))?,
        ..tol
    };
    Ok(ProblemConfig {
        bodies,
        dim,
        alpha,
        energy,
        masses,
        seed,
        output,
        threads,
        minimize,
        integration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, flags: &Overrides) -> Result<ProblemConfig, ConfigError> {
        let file = parse(text).map_err(|message| ConfigError::Parse {
            path: "test.toml".into(),
            message,
        })?;
        resolve(file, flags, None)
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let c = load("N = 2\nn = 2\nalpha = 0.5\nE = 1\n", &Overrides::default()).unwrap();
        assert_eq!((c.bodies, c.dim), (2, 2));
        assert_eq!(c.masses.as_slice(), &[1.0, 1.0]);
        assert_eq!(c.minimize, MinimizeSettings::default());
        assert_eq!(c.output, PathBuf::from("out"));
    }

    #[test]
    fn alpha_at_one_is_rejected() {
        let err = load("alpha = 1.0\n", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("alpha must lie in (0,1)"), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let flags = Overrides {
            energy: Some(2.0),
            ..Default::default()
        };
        let c = load("E = 1\n", &flags).unwrap();
        assert_eq!(c.energy, 2.0);
    }

    #[test]
    fn output_precedence() {
        let file = || parse("output = \"from-file\"\n").unwrap();
        let none = Overrides::default();
        assert_eq!(resolve(file(), &none, None).unwrap().output, PathBuf::from("from-file"));
        assert_eq!(
            resolve(file(), &none, Some("env".into())).unwrap().output,
            PathBuf::from("env")
        );
        let flag = Overrides {
            output: Some("flag".into()),
            ..Default::default()
        };
        assert_eq!(
            resolve(file(), &flag, Some("env".into())).unwrap().output,
            PathBuf::from("flag")
        );
    }

    #[test]
    fn errors_name_the_problem() {
        let err = load("alpha = \"x\"\n", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = load("bogus = 3\n", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = load("masses = [1.0, 2.0, 3.0]\nN = 2\n", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("masses"), "{err}");
        let err = load("E = -1\n", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("E must be positive"), "{err}");
        let err = load("grad_tol = 0\n", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("grad_tol"), "{err}");
    }

    #[test]
    fn masses_set_body_count() {
        let c = load("masses = [2.0, 4.0, 3.0]\n", &Overrides::default()).unwrap();
        assert_eq!(c.bodies, 3);
        assert_eq!(c.masses.as_slice(), &[1.0, 2.0, 1.5]);
    }
}
