//! Upper estimates of the minimal action `phi_E(x, y)` and checks of its distance axioms.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{maupertuis_bound, minimize_free_time, minimize_free_time_with, MinimizeResult, MinimizeSettings};
use crate::dynamics::PotentialParams;
use crate::error::Result;
use crate::rng;
use crate::space::{min_separation, Configuration};

/// Relative accuracy of a `phi` estimate: values agree to `PHI_TOLERANCE * (1 + phi)`.
///
/// Covers the discretization bias of the default grid (measured well below 1e-5).
pub const PHI_TOLERANCE: f64 = 1e-5;

pub fn tolerance(phi: f64) -> f64 {
    PHI_TOLERANCE * (1.0 + phi.abs())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiEstimate {
    pub value: f64,
    pub converged: bool,
    /// `x = y`: the value is the action on the time floor, not a positive distance.
    pub degenerate: bool,
    pub restarts: usize,
    pub result: MinimizeResult,
}

impl PhiEstimate {
    fn from_result(result: MinimizeResult, restarts: usize) -> Self {
        Self {
            value: result.value(),
            converged: result.converged,
            degenerate: result.degenerate,
            restarts,
            result,
        }
    }

    pub fn tolerance(&self) -> f64 {
        tolerance(self.value)
    }
}

/// Best free-time minimization over `settings.restarts` initial paths.
pub fn phi_estimate(
    x: &Configuration,
    y: &Configuration,
    energy: f64,
    p: &PotentialParams,
    settings: &MinimizeSettings,
) -> Result<PhiEstimate> {
    let result = minimize_free_time(x, y, energy, p, settings)?;
    Ok(PhiEstimate::from_result(result, settings.restarts))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriangleCheck {
    pub phi_xy: f64,
    pub phi_yz: f64,
    pub phi_xz: f64,
    /// `phi(x, y) + phi(y, z) - phi(x, z)`.
    pub margin: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub min_sep: f64,
}

impl TriangleCheck {
    /// `margin >= -3 tol`.
    pub fn holds(&self) -> bool {
        self.margin >= -3.0 * self.tolerance
    }
}

/// Triangle inequality at `(x, y, z)`. The estimate of `phi(x, z)` also starts from the
/// concatenation of the `x -> y` and `y -> z` minimizers, so it can only beat their sum.
pub fn check_triangle(
    x: &Configuration,
    y: &Configuration,
    z: &Configuration,
    energy: f64,
    p: &PotentialParams,
    settings: &MinimizeSettings,
) -> Result<TriangleCheck> {
    Ok(triangle_legs(x, y, z, energy, p, settings)?.0)
}

fn triangle_legs(
    x: &Configuration,
    y: &Configuration,
    z: &Configuration,
    energy: f64,
    p: &PotentialParams,
    settings: &MinimizeSettings,
) -> Result<(TriangleCheck, [MinimizeResult; 3])> {
    let xy = minimize_free_time(x, y, energy, p, settings)?;
    let yz = minimize_free_time(y, z, energy, p, settings)?;
    let joined = xy.path.concatenated(&yz.path, settings.nodes)?;
    let xz = minimize_free_time_with(x, z, energy, p, settings, std::slice::from_ref(&joined))?;
    let check = TriangleCheck {
        phi_xy: xy.value(),
        phi_yz: yz.value(),
        phi_xz: xz.value(),
        margin: xy.value() + yz.value() - xz.value(),
        tolerance: tolerance(xz.value()),
        converged: xy.converged && yz.converged && xz.converged,
        min_sep: xy.min_sep.min(yz.min_sep).min(xz.min_sep),
    };
    Ok((check, [xy, yz, xz]))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PositivityCheck {
    /// `max_i |x_i - y_i|^2 / (2 T*)`.
    pub bound: f64,
    pub action: f64,
    pub slack: f64,
}

impl PositivityCheck {
    pub fn holds(&self) -> bool {
        self.slack >= -1e-12 * (1.0 + self.action.abs())
    }
}

/// The per-body lower bound `A >= max_i |x_i - y_i|^2 / (2 T*)` at the optimal time `T*`.
pub fn check_positivity_bound(
    x: &Configuration,
    y: &Configuration,
    result: &MinimizeResult,
) -> Result<PositivityCheck> {
    x.check_shape(y)?;
    let largest = (0..x.bodies())
        .map(|i| {
            x.point(i)
                .iter()
                .zip(y.point(i))
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let bound = largest / (2.0 * result.duration());
    let action = result.value();
    Ok(PositivityCheck {
        bound,
        action,
        slack: action - bound,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSample {
    pub index: usize,
    pub seed: u64,
    pub x: Configuration,
    pub y: Configuration,
    pub z: Option<Configuration>,
    pub phi_xy: f64,
    /// `phi(y, x)` for pairs, `phi(y, z)` for triples.
    pub phi_yx_or_yz: f64,
    pub phi_xz: Option<f64>,
    /// Symmetry mismatch `|phi(x,y) - phi(y,x)|` (pairs) or triangle margin (triples).
    pub margin: f64,
    pub tolerance: f64,
    /// Smallest slack of the Maupertuis and per-body lower bounds over all estimates.
    pub lower_bound_slack: f64,
    pub lower_bounds_hold: bool,
    pub converged: bool,
    pub min_sep: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricSuiteConfig {
    pub dim: usize,
    pub pairs: usize,
    pub triples: usize,
    pub energy: f64,
    /// Standard deviation of the Gaussian body positions.
    pub spread: f64,
    /// Samples are redrawn until `r(x) >= min_separation * spread`.
    pub min_separation: f64,
    pub seed: u64,
}

impl Default for MetricSuiteConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            pairs: 50,
            triples: 25,
            energy: 1.0,
            spread: 1.0,
            min_separation: 0.3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSuiteReport {
    pub pairs: Vec<MetricSample>,
    pub triples: Vec<MetricSample>,
    pub symmetry_violations: usize,
    pub triangle_violations: usize,
    pub lower_bound_violations: usize,
    pub unconverged: usize,
    /// Largest symmetry mismatch in units of `tol`.
    pub worst_symmetry_ratio: f64,
    /// Smallest triangle margin in units of `tol`.
    pub worst_triangle_ratio: f64,
    /// Smallest interior separation over every minimizer computed.
    pub min_sep: f64,
    /// Seeds of failing samples for replay.
    pub replay_seeds: Vec<u64>,
}

impl MetricSuiteReport {
    pub fn violations(&self) -> usize {
        self.symmetry_violations + self.triangle_violations + self.lower_bound_violations
    }
}

/// Gaussian configuration with `r(x) >= min_sep * spread`.
pub fn sample_configuration<R: Rng>(
    rng: &mut R,
    bodies: usize,
    dim: usize,
    spread: f64,
    min_sep: f64,
) -> Configuration {
    loop {
        let coords = (0..bodies * dim)
            .map(|_| spread * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let x = Configuration::new(bodies, dim, coords).expect("valid shape");
        if min_separation(&x) >= min_sep * spread {
            return x;
        }
    }
}

fn lower_bound_slack(
    x: &Configuration,
    y: &Configuration,
    result: &MinimizeResult,
    energy: f64,
    p: &PotentialParams,
) -> Result<f64> {
    let maupertuis = result.value() - maupertuis_bound(x, y, energy, p.masses())?;
    let per_body = check_positivity_bound(x, y, result)?.slack;
    Ok(maupertuis.min(per_body))
}

fn lower_bound_floor(value: f64) -> f64 {
    -1e-12 * (1.0 + value.abs())
}

/// One pair sample: `phi(x, y)`, `phi(y, x)` and both lower bounds.
pub fn pair_sample(
    index: usize,
    config: &MetricSuiteConfig,
    p: &PotentialParams,
    settings: &MinimizeSettings,
) -> Result<MetricSample> {
    let seed = rng::sample_seed(rng::stream_seed(config.seed, "metric/pairs"), index as u64);
    let mut r = rng::from_seed(seed);
    let n = p.bodies();
    let x = sample_configuration(&mut r, n, config.dim, config.spread, config.min_separation);
    let y = sample_configuration(&mut r, n, config.dim, config.spread, config.min_separation);
    let forward = minimize_free_time(&x, &y, config.energy, p, settings)?;
    let backward = minimize_free_time(&y, &x, config.energy, p, settings)?;
    let slack = lower_bound_slack(&x, &y, &forward, config.energy, p)?.min(lower_bound_slack(
        &y,
        &x,
        &backward,
        config.energy,
        p,
    )?);
    let mismatch = (forward.value() - backward.value()).abs();
    let tol = tolerance(forward.value().max(backward.value()));
    let lower_ok = slack >= lower_bound_floor(forward.value());
    Ok(MetricSample {
        index,
        seed,
        phi_xy: forward.value(),
        phi_yx_or_yz: backward.value(),
        phi_xz: None,
        margin: mismatch,
        tolerance: tol,
        lower_bound_slack: slack,
        lower_bounds_hold: lower_ok,
        converged: forward.converged && backward.converged,
        min_sep: forward.min_sep.min(backward.min_sep),
        passed: mismatch <= 3.0 * tol && lower_ok,
        x,
        y,
        z: None,
    })
}

/// One triple sample: the triangle margin and the lower bounds of the three legs.
pub fn triple_sample(
    index: usize,
    config: &MetricSuiteConfig,
    p: &PotentialParams,
    settings: &MinimizeSettings,
) -> Result<MetricSample> {
    let seed = rng::sample_seed(rng::stream_seed(config.seed, "metric/triples"), index as u64);
    let mut r = rng::from_seed(seed);
    let n = p.bodies();
    let x = sample_configuration(&mut r, n, config.dim, config.spread, config.min_separation);
    let y = sample_configuration(&mut r, n, config.dim, config.spread, config.min_separation);
    let z = sample_configuration(&mut r, n, config.dim, config.spread, config.min_separation);
    let (check, [xy, yz, xz]) = triangle_legs(&x, &y, &z, config.energy, p, settings)?;
    let slack = lower_bound_slack(&x, &y, &xy, config.energy, p)?
        .min(lower_bound_slack(&y, &z, &yz, config.energy, p)?)
        .min(lower_bound_slack(&x, &z, &xz, config.energy, p)?);
    let lower_ok = slack >= lower_bound_floor(check.phi_xz);
    Ok(MetricSample {
        index,
        seed,
        phi_xy: check.phi_xy,
        phi_yx_or_yz: check.phi_yz,
        phi_xz: Some(check.phi_xz),
        margin: check.margin,
        tolerance: check.tolerance,
        lower_bound_slack: slack,
        lower_bounds_hold: lower_ok,
        converged: check.converged,
        min_sep: check.min_sep,
        passed: check.holds() && lower_ok,
        x,
        y,
        z: Some(z),
    })
}

/// Randomized pairs and triples, evaluated in parallel; output order is the sample order.
pub fn metric_suite(
    config: &MetricSuiteConfig,
    p: &PotentialParams,
    settings: &MinimizeSettings,
) -> Result<MetricSuiteReport> {
    let pairs = (0..config.pairs)
        .into_par_iter()
        .map(|i| pair_sample(i, config, p, settings))
        .collect::<Result<Vec<_>>>()?;
    let triples = (0..config.triples)
        .into_par_iter()
        .map(|i| triple_sample(i, config, p, settings))
        .collect::<Result<Vec<_>>>()?;
    let ratio = |s: &MetricSample| s.margin / s.tolerance;
    let mut report = MetricSuiteReport {
        symmetry_violations: pairs.iter().filter(|s| s.margin > 3.0 * s.tolerance).count(),
        triangle_violations: triples.iter().filter(|s| s.margin < -3.0 * s.tolerance).count(),
        lower_bound_violations: pairs.iter().chain(&triples).filter(|s| !s.lower_bounds_hold).count(),
        unconverged: pairs.iter().chain(&triples).filter(|s| !s.converged).count(),
        worst_symmetry_ratio: pairs.iter().map(ratio).fold(0.0, f64::max),
        worst_triangle_ratio: triples.iter().map(ratio).fold(f64::INFINITY, f64::min),
        min_sep: pairs
            .iter()
            .chain(&triples)
            .map(|s| s.min_sep)
            .fold(f64::INFINITY, f64::min),
        replay_seeds: pairs
            .iter()
            .chain(&triples)
            .filter(|s| !s.passed || !s.converged)
            .map(|s| s.seed)
            .collect(),
        pairs,
        triples,
    };
    if report.triples.is_empty() {
        report.worst_triangle_ratio = 0.0;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MassVector;

    fn params() -> PotentialParams {
        PotentialParams::new(0.5, MassVector::new(vec![1.0, 2.0]).unwrap()).unwrap()
    }

    #[test]
    fn identical_endpoints_are_degenerate() {
        let p = params();
        let x = Configuration::from_points(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let est = phi_estimate(&x, &x, 1.0, &p, &MinimizeSettings::default()).unwrap();
        assert!(est.degenerate);
        assert!(est.value < 1e-3);
        let check = check_positivity_bound(&x, &x, &est.result).unwrap();
        assert_eq!(check.bound, 0.0);
        assert!(check.holds());
    }

    #[test]
    fn triangle_with_repeated_point() {
        let p = params();
        let x = Configuration::from_points(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let y = Configuration::from_points(&[[0.0, 1.0], [1.5, 0.5]]).unwrap();
        let s = MinimizeSettings {
            nodes: 80,
            ..Default::default()
        };
        let check = check_triangle(&x, &y, &y, 1.0, &p, &s).unwrap();
        assert!(check.holds());
        assert!(check.margin >= -3.0 * check.tolerance);
        assert!(check.margin < 1e-2);
    }

    #[test]
    fn sampler_respects_separation() {
        let mut r = rng::stream(3, "test");
        for _ in 0..50 {
            let x = sample_configuration(&mut r, 4, 3, 2.0, 0.4);
            assert!(min_separation(&x) >= 0.8);
        }
    }
}
