use serde::{Deserialize, Serialize};

use super::{angular_momentum, linear_momentum, raw_accel, total_energy, PhasePoint, PotentialParams};
use crate::error::{Error, Result};
use crate::space::{min_separation, raw_min_separation, Configuration};

/// Step-size control for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSettings {
    pub rtol: f64,
    pub atol: f64,
    /// Halt when `r(x)` drops below this; `None` means `1e-8 * r(x0)`.
    pub collision_eps: Option<f64>,
    pub max_steps: usize,
}

impl Default for ToleranceSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            collision_eps: None,
            max_steps: 2_000_000,
        }
    }
}

impl ToleranceSettings {
    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IntegrationStatus {
    Completed,
    /// Two bodies came closer than the collision threshold at time `t`.
    CloseApproach {
        t: f64,
        min_separation: f64,
    },
    StepLimit {
        t: f64,
    },
}

/// Accepted steps of an integration together with their energies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub energies: Vec<f64>,
    pub status: IntegrationStatus,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &PhasePoint {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial time")
    }

    pub fn completed(&self) -> bool {
        self.status == IntegrationStatus::Completed
    }

    /// `|h(t) - h(0)| / |h(0)|` per accepted step (absolute when `h(0) = 0`).
    pub fn energy_drift_series(&self) -> Vec<f64> {
        let h0 = self.energies[0];
        let scale = if h0 == 0.0 { 1.0 } else { h0.abs() };
        self.energies.iter().map(|h| (h - h0).abs() / scale).collect()
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.energy_drift_series().into_iter().fold(0.0, f64::max)
    }

    /// Largest change of total momentum, relative to `sum_i m_i |v_i(0)|`.
    pub fn max_momentum_drift(&self, p: &PotentialParams) -> f64 {
        let m = p.masses();
        let scale = momentum_scale(&self.states[0], p);
        let p0 = linear_momentum(&self.states[0], m);
        self.states
            .iter()
            .map(|s| max_abs_diff(&linear_momentum(s, m), &p0) / scale)
            .fold(0.0, f64::max)
    }

    /// Largest change of the angular momentum bivector, relative to `sum_i m_i |x_i| |v_i|` at `t = 0`.
    pub fn max_angular_momentum_drift(&self, p: &PotentialParams) -> f64 {
        let m = p.masses();
        let s0 = &self.states[0];
        let scale = (0..s0.x.bodies())
            .map(|i| m[i] * crate::space::euclid_norm(s0.x.point(i)) * crate::space::euclid_norm(s0.v.point(i)))
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        let l0 = angular_momentum(s0, m);
        self.states
            .iter()
            .map(|s| max_abs_diff(&angular_momentum(s, m), &l0) / scale)
            .fold(0.0, f64::max)
    }
}

fn momentum_scale(s: &PhasePoint, p: &PotentialParams) -> f64 {
    let m = p.masses();
    (0..s.v.bodies())
        .map(|i| m[i] * crate::space::euclid_norm(s.v.point(i)))
        .sum::<f64>()
        .max(f64::MIN_POSITIVE)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// Dormand-Prince 5(4) coefficients. The system is autonomous, so the nodes c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// First-order form of the equations of motion on `y = (x, v)`.
struct Rhs<'a> {
    dim: usize,
    alpha: f64,
    masses: &'a [f64],
    half: usize,
}

impl Rhs<'_> {
    fn eval(&self, y: &[f64], out: &mut [f64]) -> bool {
        let (x, v) = y.split_at(self.half);
        let (dx, dv) = out.split_at_mut(self.half);
        dx.copy_from_slice(v);
        raw_accel(x, self.dim, self.alpha, self.masses, dv).is_ok()
    }
}

/// Integrates from `s0` to `t_end` with the adaptive Dormand-Prince 5(4) pair.
pub fn integrate(s0: &PhasePoint, p: &PotentialParams, t_end: f64, ctrl: &ToleranceSettings) -> Result<Trajectory> {
    integrate_with_stops(s0, p, &[t_end], ctrl)
}

/// Like [`integrate`], but every time in `stops` (increasing, the last one being the
/// final time) is hit exactly by an accepted step.
pub fn integrate_with_stops(
    s0: &PhasePoint,
    p: &PotentialParams,
    stops: &[f64],
    ctrl: &ToleranceSettings,
) -> Result<Trajectory> {
    ctrl.validate()?;
    s0.x.check_masses(p.masses())?;
    let t_end = *stops
        .last()
        .ok_or_else(|| Error::InvalidParameter("no output times given".into()))?;
    if !(t_end > 0.0) || stops.windows(2).any(|w| !(w[0] < w[1])) || !(stops[0] > 0.0) {
        return Err(Error::InvalidParameter(
            "output times must be positive and strictly increasing".into(),
        ));
    }
    let r0 = min_separation(&s0.x);
    if r0 == 0.0 {
        return Err(Error::Precondition("initial configuration has a collision".into()));
    }
    let collision_eps = ctrl.collision_eps.unwrap_or(1e-8 * r0);

    let (bodies, dim) = (s0.x.bodies(), s0.x.dim());
    let half = bodies * dim;
    let rhs = Rhs {
        dim,
        alpha: p.alpha(),
        masses: p.masses().as_slice(),
        half,
    };
    let len = 2 * half;
    let mut y: Vec<f64> = s0.x.coords().iter().chain(s0.v.coords()).copied().collect();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; len]);
    let mut tmp = vec![0.0; len];
    let mut y_new = vec![0.0; len];

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![s0.clone()],
        energies: vec![total_energy(s0, p)?],
        status: IntegrationStatus::Completed,
        rejected_steps: 0,
    };

    rhs.eval(&y, &mut k[0]);
    let mut t = 0.0;
    let mut h = initial_step(&y, &k[0], ctrl, t_end);
    let mut next_stop = 0;
    let mut steps = 0usize;

    while next_stop < stops.len() {
        if steps >= ctrl.max_steps {
            traj.status = IntegrationStatus::StepLimit { t };
            return Ok(traj);
        }
        steps += 1;
        let target = stops[next_stop];
        let mut hits_stop = false;
        let mut step = h;
        if t + step >= target || t + 1.01 * step >= target {
            step = target - t;
            hits_stop = true;
        }

        let ok = dopri_stages(&rhs, &y, step, &mut k, &mut tmp, &mut y_new);
        let err = if ok {
            error_norm(&y, &y_new, &k, step, ctrl)
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            t = if hits_stop { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            let state = split_state(&y, bodies, dim);
            let r = raw_min_separation(&y[..half], dim);
            traj.energies.push(total_energy(&state, p)?);
            traj.times.push(t);
            traj.states.push(state);
            if r < collision_eps {
                traj.status = IntegrationStatus::CloseApproach { t, min_separation: r };
                return Ok(traj);
            }
            if hits_stop {
                next_stop += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // Keep the proposed size from the unclamped step when a stop shortened it.
            h = if hits_stop { h.max(step * factor) } else { step * factor };
        } else {
            traj.rejected_steps += 1;
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.25
            };
            h = step * factor;
            if h < 1e-14 * t.abs().max(1.0) {
                // The step collapsed: the solution is running into a singularity.
                let r = raw_min_separation(&y[..half], dim);
                traj.status = IntegrationStatus::CloseApproach { t, min_separation: r };
                return Ok(traj);
            }
        }
    }
    Ok(traj)
}

fn dopri_stages(rhs: &Rhs<'_>, y: &[f64], h: f64, k: &mut [Vec<f64>; 7], tmp: &mut [f64], y_new: &mut [f64]) -> bool {
    let n = y.len();
    macro_rules! stage {
        ($dst:expr, $($coef:expr => $src:expr),+) => {{
            for i in 0..n {
                tmp[i] = y[i] + h * (0.0 $(+ $coef * k[$src][i])+);
            }
            if !rhs.eval(tmp, &mut k[$dst]) {
                return false;
            }
        }};
    }
    stage!(1, A21 => 0);
    stage!(2, A31 => 0, A32 => 1);
    stage!(3, A41 => 0, A42 => 1, A43 => 2);
    stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
    stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
    for i in 0..n {
        y_new[i] = y[i] + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
    }
    rhs.eval(y_new, &mut k[6])
}

fn error_norm(y: &[f64], y_new: &[f64], k: &[Vec<f64>; 7], h: f64, ctrl: &ToleranceSettings) -> f64 {
    let n = y.len();
    let mut acc = 0.0;
    for i in 0..n {
        let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
        let sc = ctrl.atol + ctrl.rtol * y[i].abs().max(y_new[i].abs());
        acc += (e / sc) * (e / sc);
    }
    (acc / n as f64).sqrt()
}

fn initial_step(y: &[f64], f: &[f64], ctrl: &ToleranceSettings, t_end: f64) -> f64 {
    let scale = |v: &[f64]| {
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(vi, yi)| {
                let sc = ctrl.atol + ctrl.rtol * yi.abs();
                (vi / sc) * (vi / sc)
            })
            .sum();
        (s / y.len() as f64).sqrt()
    };
    let (d0, d1) = (scale(y), scale(f));
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(t_end).max(1e-12 * t_end)
}

fn split_state(y: &[f64], bodies: usize, dim: usize) -> PhasePoint {
    let half = bodies * dim;
    PhasePoint {
        x: Configuration::from_raw(bodies, dim, y[..half].to_vec()),
        v: Configuration::from_raw(bodies, dim, y[half..].to_vec()),
    }
}

/// Fixed-step velocity Verlet. The step is shrunk so that a whole number of steps ends
/// exactly at `t_end`; every step is recorded.
pub fn integrate_leapfrog(
    s0: &PhasePoint,
    p: &PotentialParams,
    t_end: f64,
    dt: f64,
    collision_eps: Option<f64>,
) -> Result<Trajectory> {
    s0.x.check_masses(p.masses())?;
    if !(t_end > 0.0 && dt > 0.0) {
        return Err(Error::InvalidParameter("t_end and dt must be positive".into()));
    }
    let r0 = min_separation(&s0.x);
    if r0 == 0.0 {
        return Err(Error::Precondition("initial configuration has a collision".into()));
    }
    let eps = collision_eps.unwrap_or(1e-8 * r0);
    let steps = (t_end / dt).ceil() as usize;
    let h = t_end / steps as f64;
    let (bodies, dim) = (s0.x.bodies(), s0.x.dim());
    let (alpha, m) = (p.alpha(), p.masses().as_slice());
    let mut x = s0.x.coords().to_vec();
    let mut v = s0.v.coords().to_vec();
    let mut a = vec![0.0; x.len()];
    raw_accel(&x, dim, alpha, m, &mut a).map_err(|(i, j)| Error::Collision { i, j })?;

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![s0.clone()],
        energies: vec![total_energy(s0, p)?],
        status: IntegrationStatus::Completed,
        rejected_steps: 0,
    };
    for step in 1..=steps {
        for i in 0..x.len() {
            v[i] += 0.5 * h * a[i];
            x[i] += h * v[i];
        }
        let t = step as f64 * h;
        if raw_accel(&x, dim, alpha, m, &mut a).is_err() {
            traj.status = IntegrationStatus::CloseApproach { t, min_separation: 0.0 };
            return Ok(traj);
        }
        for i in 0..x.len() {
            v[i] += 0.5 * h * a[i];
        }
        let state = PhasePoint {
            x: Configuration::from_raw(bodies, dim, x.clone()),
            v: Configuration::from_raw(bodies, dim, v.clone()),
        };
        traj.energies.push(total_energy(&state, p)?);
        traj.times.push(t);
        traj.states.push(state);
        let r = raw_min_separation(&x, dim);
        if r < eps {
            traj.status = IntegrationStatus::CloseApproach { t, min_separation: r };
            return Ok(traj);
        }
    }
    Ok(traj)
}
