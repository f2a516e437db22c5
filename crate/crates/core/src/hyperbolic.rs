//! Approximate hyperbolic motions: free-time minimizers from a fixed `x0` to receding
//! targets `R_k a`, chained by warm starts, with diagnostics of their asymptotics.

use serde::{Deserialize, Serialize};

use crate::action::{minimize_free_time, minimize_free_time_from, DiscretePath, MinimizeResult, MinimizeSettings};
use crate::dynamics::PotentialParams;
use crate::error::{Error, Result};
use crate::space::{angle, min_separation, weighted_norm, Configuration, UnitShape};

/// How the target scales `R_1 < ... < R_K` are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RadiiSchedule {
    /// `R_{k+1} = ratio * R_k`; `first` defaults to `c (1 + ||x0||) / r(a)`.
    Geometric {
        first: Option<f64>,
        ratio: f64,
        legs: usize,
    },
    Explicit(Vec<f64>),
}

impl Default for RadiiSchedule {
    fn default() -> Self {
        RadiiSchedule::Geometric {
            first: None,
            ratio: 2.0,
            legs: 5,
        }
    }
}

/// Where leg `k` ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TargetMode {
    /// `R_k a`.
    #[default]
    Scaled,
    /// `x0 + R_k a`.
    Offset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicSettings {
    pub minimize: MinimizeSettings,
    /// Target time step; each leg gets `max(minimize.nodes, T / time_step)` segments.
    pub time_step: f64,
    /// Constant `c` of the lower bound `R_1 >= c (1 + ||x0||) / r(a)`.
    pub radius_constant: f64,
    pub target: TargetMode,
}

impl Default for HyperbolicSettings {
    fn default() -> Self {
        Self {
            minimize: MinimizeSettings::default(),
            time_step: 0.025,
            radius_constant: 70.0,
            target: TargetMode::Scaled,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperbolicRun {
    pub x0: Configuration,
    pub a: UnitShape,
    pub energy: f64,
    pub radii: Vec<f64>,
    pub targets: Vec<Configuration>,
    pub legs: Vec<MinimizeResult>,
    /// False when a leg failed to converge; `legs` then ends with the failed leg.
    pub complete: bool,
}

impl RadiiSchedule {
    pub fn radii(&self, x0: &Configuration, a: &UnitShape, p: &PotentialParams, constant: f64) -> Result<Vec<f64>> {
        let floor = constant * (1.0 + weighted_norm(x0, p.masses())?) / min_separation(a);
        let radii = match self {
            RadiiSchedule::Geometric { first, ratio, legs } => {
                if !(*ratio > 1.0) || *legs == 0 {
                    return Err(Error::InvalidParameter(
                        "geometric radii need ratio > 1 and at least one leg".into(),
                    ));
                }
                let r1 = first.unwrap_or(floor);
                (0..*legs).map(|k| r1 * ratio.powi(k as i32)).collect::<Vec<_>>()
            }
            RadiiSchedule::Explicit(r) => r.clone(),
        };
        if radii.is_empty() || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("radii must be strictly increasing".into()));
        }
        if !(radii[0] >= floor * (1.0 - 1e-12)) {
            return Err(Error::Precondition(format!(
                "first radius {} is below {constant} (1 + ||x0||) / r(a) = {floor}",
                radii[0]
            )));
        }
        Ok(radii)
    }
}

/// Chains free-time minimizers from `x0` to the targets of `schedule`.
pub fn construct(
    x0: &Configuration,
    a: &UnitShape,
    energy: f64,
    schedule: &RadiiSchedule,
    p: &PotentialParams,
    settings: &HyperbolicSettings,
) -> Result<HyperbolicRun> {
    x0.check_shape(a)?;
    if !(min_separation(x0) > 0.0) {
        return Err(Error::Precondition("x0 must be collision-free".into()));
    }
    if !(min_separation(a) > 0.0) {
        return Err(Error::Precondition("limit shape must be collision-free".into()));
    }
    if !(settings.time_step > 0.0) {
        return Err(Error::InvalidParameter("time_step must be positive".into()));
    }
    let radii = schedule.radii(x0, a, p, settings.radius_constant)?;
    let speed = energy.sqrt();
    let mut run = HyperbolicRun {
        x0: x0.clone(),
        a: a.clone(),
        energy,
        radii: radii.clone(),
        targets: Vec::new(),
        legs: Vec::new(),
        complete: true,
    };
    for &radius in &radii {
        let target = match settings.target {
            TargetMode::Scaled => a.scaled(radius),
            TargetMode::Offset => x0.axpy(radius, a),
        };
        let chord = weighted_norm(&(&target - x0), p.masses())?;
        let nodes = ((chord / speed / settings.time_step).ceil() as usize).max(settings.minimize.nodes);
        let leg_settings = MinimizeSettings {
            nodes,
            ..settings.minimize.clone()
        };
        let mut result = match run.legs.last() {
            Some(prev) => {
                let tail_start = run.targets.last().expect("one target per leg");
                let gap = weighted_norm(&(&target - tail_start), p.masses())?;
                let tail = DiscretePath::straight(tail_start, &target, gap / speed, 8)?;
                let init = prev.path.concatenated(&tail, nodes)?;
                minimize_free_time_from(x0, &target, energy, p, &leg_settings, &init)?
            }
            None => minimize_free_time(x0, &target, energy, p, &leg_settings)?,
        };
        if !result.converged && !run.legs.is_empty() {
            let fresh = minimize_free_time(x0, &target, energy, p, &leg_settings)?;
            if fresh.converged {
                result = fresh;
            }
        }
        let converged = result.converged;
        run.targets.push(target);
        run.legs.push(result);
        if !converged {
            run.complete = false;
            break;
        }
    }
    Ok(run)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LegReport {
    pub radius: f64,
    pub duration: f64,
    pub nodes: usize,
    pub converged: bool,
    /// `angle(gamma(T), a)`.
    pub endpoint_angle: f64,
    /// `angle(gamma(T) - x0, a)`.
    pub chord_angle: f64,
    /// `angle(gamma'(T), a)`.
    pub velocity_angle: f64,
    /// `||gamma'(T)||`.
    pub terminal_speed: f64,
    /// `| ||gamma(T)|| / T - sqrt(E) |`.
    pub mean_speed_error: f64,
    pub min_sep: f64,
    /// Minimum of `r(gamma(t)) / (r(a) sqrt(E) t)` over the last quarter of the leg.
    pub separation_growth: f64,
    /// `max |K - U - E|` over the interior nodes.
    pub energy_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub energy: f64,
    pub sqrt_energy: f64,
    pub legs: Vec<LegReport>,
    /// Right end of the common early window `[0, t*]`, half the first leg's duration.
    pub early_window: f64,
    /// Sup-norm distance on the early window between legs `k` and `k + 1`.
    pub gaps: Vec<f64>,
    pub min_sep: f64,
    /// Terminal speed of the last leg, and the same value in the `sqrt(2E)` convention.
    pub terminal_speed: f64,
    pub terminal_speed_alt_convention: f64,
    pub terminal_speed_relative_error: f64,
    pub velocity_angle_nonincreasing: bool,
    pub endpoint_angle_nonincreasing: bool,
    pub gaps_decreasing: bool,
}

fn nonincreasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

pub fn leg_report(run: &HyperbolicRun, k: usize, p: &PotentialParams) -> Result<LegReport> {
    let leg = &run.legs[k];
    let m = p.masses();
    let path = &leg.path;
    let end = path.end();
    let velocity = path.velocities(p)?.pop().expect("non-empty path");
    let duration = path.duration();
    let sqrt_e = run.energy.sqrt();
    let ra = min_separation(&run.a);
    let segments = path.segments();
    let separation_growth = (segments - segments / 4..=segments)
        .map(|j| min_separation(&path.node(j)) / (ra * sqrt_e * duration * j as f64 / segments as f64))
        .fold(f64::INFINITY, f64::min);
    let chord = &end - &run.x0;
    Ok(LegReport {
        radius: run.radii[k],
        duration,
        nodes: segments,
        converged: leg.converged,
        endpoint_angle: angle(&end, &run.a, m)?,
        chord_angle: angle(&chord, &run.a, m)?,
        velocity_angle: angle(&velocity, &run.a, m)?,
        terminal_speed: weighted_norm(&velocity, m)?,
        mean_speed_error: (weighted_norm(&end, m)? / duration - sqrt_e).abs(),
        min_sep: leg.min_sep,
        separation_growth,
        energy_error: leg.energy_error,
    })
}

/// Per-leg asymptotics and the Cauchy diagnostic between consecutive legs.
pub fn asymptotic_report(run: &HyperbolicRun, p: &PotentialParams) -> Result<AsymptoticReport> {
    if run.legs.is_empty() {
        return Err(Error::Precondition("run has no legs".into()));
    }
    let legs = (0..run.legs.len())
        .map(|k| leg_report(run, k, p))
        .collect::<Result<Vec<_>>>()?;
    let early_window = 0.5 * run.legs[0].path.duration();
    let mut gaps = Vec::new();
    for pair in run.legs.windows(2) {
        let (coarse, fine) = (&pair[0].path, &pair[1].path);
        let mut gap = 0.0f64;
        for t in fine.times().into_iter().take_while(|&t| t <= early_window) {
            gap = gap.max(weighted_norm(
                &(&coarse.position_at(t) - &fine.position_at(t)),
                p.masses(),
            )?);
        }
        gaps.push(gap);
    }
    let sqrt_e = run.energy.sqrt();
    let last = legs.last().expect("non-empty");
    let velocity_angles: Vec<f64> = legs.iter().map(|l| l.velocity_angle).collect();
    let endpoint_angles: Vec<f64> = legs.iter().map(|l| l.endpoint_angle).collect();
    Ok(AsymptoticReport {
        energy: run.energy,
        sqrt_energy: sqrt_e,
        early_window,
        min_sep: legs.iter().map(|l| l.min_sep).fold(f64::INFINITY, f64::min),
        terminal_speed: last.terminal_speed,
        terminal_speed_alt_convention: std::f64::consts::SQRT_2 * last.terminal_speed,
        terminal_speed_relative_error: (last.terminal_speed - sqrt_e).abs() / sqrt_e,
        velocity_angle_nonincreasing: nonincreasing(&velocity_angles, 0.0),
        endpoint_angle_nonincreasing: nonincreasing(&endpoint_angles, 1e-12),
        gaps_decreasing: gaps.windows(2).all(|w| w[1] < w[0]),
        gaps,
        legs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{normalize_to_sphere, MassVector};

    fn setup() -> (PotentialParams, Configuration, UnitShape) {
        let m = MassVector::new(vec![1.0, 1.0]).unwrap();
        let p = PotentialParams::new(0.5, m.clone()).unwrap();
        let x0 = Configuration::from_points(&[[0.0, 0.0], [0.0, 1.0]]).unwrap();
        let a = normalize_to_sphere(&Configuration::from_points(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap(), &m).unwrap();
        (p, x0, a)
    }

    #[test]
    fn default_radii_follow_the_hypothesis_constant() {
        let (p, x0, a) = setup();
        let radii = RadiiSchedule::default().radii(&x0, &a, &p, 70.0).unwrap();
        let expected = 70.0 * (1.0 + weighted_norm(&x0, p.masses()).unwrap()) / min_separation(&a);
        assert_eq!(radii.len(), 5);
        assert!((radii[0] - expected).abs() < 1e-12 * expected);
        assert!((radii[4] - 16.0 * expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn rejects_bad_schedules() {
        let (p, x0, a) = setup();
        assert!(RadiiSchedule::Explicit(vec![500.0, 400.0])
            .radii(&x0, &a, &p, 70.0)
            .is_err());
        assert!(RadiiSchedule::Explicit(vec![1.0]).radii(&x0, &a, &p, 70.0).is_err());
        assert!(RadiiSchedule::Geometric {
            first: None,
            ratio: 1.0,
            legs: 3
        }
        .radii(&x0, &a, &p, 70.0)
        .is_err());
    }

    #[test]
    fn single_leg_report_has_no_gaps() {
        let (p, x0, a) = setup();
        let settings = HyperbolicSettings {
            radius_constant: 1.0,
            time_step: 0.2,
            ..Default::default()
        };
        let schedule = RadiiSchedule::Explicit(vec![20.0]);
        let run = construct(&x0, &a, 2.0, &schedule, &p, &settings).unwrap();
        assert!(run.complete);
        let report = asymptotic_report(&run, &p).unwrap();
        assert!(report.gaps.is_empty());
        assert_eq!(report.legs.len(), 1);
        assert!(report.legs[0].endpoint_angle < 1e-12);
        assert!(report.legs[0].velocity_angle.is_finite());
    }
}
