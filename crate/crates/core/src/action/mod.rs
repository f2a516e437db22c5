//! The fixed-energy action `A_E(gamma) = int_0^T ||gamma'||^2 + U(gamma) + E dt` on
//! piecewise-linear paths over a uniform time grid, and its minimizers.
//!
//! With nodes `gamma_0 .. gamma_M` and `dt = T / M` the discrete action is
//!
//! ```text
//! A = sum_k ||gamma_{k+1} - gamma_k||^2 / dt            (midpoint kinetic term)
//!   + dt * (U_0 / 2 + U_1 + ... + U_{M-1} + U_M / 2)    (trapezoidal potential)
//!   + E * T
//! ```
//!
//! Its stationarity condition in the interior nodes is the Stormer-Verlet scheme
//! `(gamma_{k+1} - 2 gamma_k + gamma_{k-1}) / dt^2 = a(gamma_k)`.

mod minimize;
mod optim;

pub use minimize::{
    minimize_fixed_time, minimize_free_time, minimize_free_time_from, minimize_free_time_with, MinimizeResult,
    MinimizeSettings,
};

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    acceleration, integrate, raw_accel, raw_potential, PhasePoint, PotentialParams, ToleranceSettings,
};
use crate::error::{Error, Result};
use crate::space::{raw_min_separation, raw_norm_sq, weighted_norm, Configuration, MassVector};

/// Nodes of a path on the uniform grid `t_k = k T / M`, `k = 0..=M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePath {
    bodies: usize,
    dim: usize,
    duration: f64,
    coords: Vec<f64>,
}

impl DiscretePath {
    pub fn new(duration: f64, nodes: &[Configuration]) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "path duration must be positive, got {duration}"
            )));
        }
        if nodes.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "a path needs at least two segments, got {}",
                nodes.len().saturating_sub(1)
            )));
        }
        for n in &nodes[1..] {
            nodes[0].check_shape(n)?;
        }
        Ok(Self {
            bodies: nodes[0].bodies(),
            dim: nodes[0].dim(),
            duration,
            coords: nodes.iter().flat_map(|n| n.coords().iter().copied()).collect(),
        })
    }

    /// Constant-speed segment from `x` to `y`.
    pub fn straight(x: &Configuration, y: &Configuration, duration: f64, segments: usize) -> Result<Self> {
        x.check_shape(y)?;
        if segments < 2 {
            return Err(Error::InvalidParameter(format!(
                "a path needs at least two segments, got {segments}"
            )));
        }
        let nodes: Vec<Configuration> = (0..=segments)
            .map(|k| crate::space::lerp(x, y, k as f64 / segments as f64))
            .collect();
        Self::new(duration, &nodes)
    }

    pub(crate) fn from_raw(bodies: usize, dim: usize, duration: f64, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len() % (bodies * dim), 0);
        Self {
            bodies,
            dim,
            duration,
            coords,
        }
    }

    pub fn bodies(&self) -> usize {
        self.bodies
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn segments(&self) -> usize {
        self.coords.len() / self.stride() - 1
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.segments() as f64
    }

    pub(crate) fn stride(&self) -> usize {
        self.bodies * self.dim
    }

    pub(crate) fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn node_coords(&self, k: usize) -> &[f64] {
        let s = self.stride();
        &self.coords[k * s..(k + 1) * s]
    }

    pub fn node(&self, k: usize) -> Configuration {
        Configuration::from_raw(self.bodies, self.dim, self.node_coords(k).to_vec())
    }

    pub fn nodes(&self) -> Vec<Configuration> {
        (0..=self.segments()).map(|k| self.node(k)).collect()
    }

    pub fn start(&self) -> Configuration {
        self.node(0)
    }

    pub fn end(&self) -> Configuration {
        self.node(self.segments())
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..=self.segments()).map(|k| k as f64 * dt).collect()
    }

    /// Same nodes traversed over a different total time.
    pub fn with_duration(&self, duration: f64) -> Self {
        Self {
            duration,
            ..self.clone()
        }
    }

    /// The path traversed backwards.
    pub fn reversed(&self) -> Self {
        let s = self.stride();
        let coords = self.coords.chunks_exact(s).rev().flatten().copied().collect();
        Self { coords, ..self.clone() }
    }

    /// Smallest `r(gamma_k)` over the interior nodes.
    pub fn interior_min_separation(&self) -> f64 {
        (1..self.segments())
            .map(|k| raw_min_separation(self.node_coords(k), self.dim))
            .fold(f64::INFINITY, f64::min)
    }

    /// Position at time `t` by cubic Lagrange interpolation through the four nearest nodes
    /// (`t` is clamped to `[0, T]`).
    pub fn position_at(&self, t: f64) -> Configuration {
        let m = self.segments();
        let u = (t / self.dt()).clamp(0.0, m as f64);
        let s = self.stride();
        let base = (u.floor() as usize).min(m - 1);
        // Stencil of four nodes, shifted inward at the ends.
        let first = base.saturating_sub(1).min(m.saturating_sub(3));
        let count = 4.min(m + 1);
        let xs: Vec<f64> = (first..first + count).map(|k| k as f64).collect();
        let mut out = vec![0.0; s];
        for (a, &xa) in xs.iter().enumerate() {
            let w: f64 = xs
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(_, &xb)| (u - xb) / (xa - xb))
                .product();
            for (o, c) in out.iter_mut().zip(self.node_coords(first + a)) {
                *o += w * c;
            }
        }
        Configuration::from_raw(self.bodies, self.dim, out)
    }

    /// Same duration, `segments` uniform segments, positions by [`Self::position_at`].
    pub fn resampled(&self, segments: usize) -> Result<Self> {
        if segments < 2 {
            return Err(Error::InvalidParameter("a path needs at least two segments".into()));
        }
        let mut coords = Vec::with_capacity((segments + 1) * self.stride());
        for k in 0..=segments {
            let node = if k == 0 {
                self.start()
            } else if k == segments {
                self.end()
            } else {
                self.position_at(self.duration * k as f64 / segments as f64)
            };
            coords.extend_from_slice(node.coords());
        }
        Ok(Self::from_raw(self.bodies, self.dim, self.duration, coords))
    }

    /// `self` followed by `next`, on a uniform grid of `segments` segments over the summed
    /// duration. The end of `self` must match the start of `next`.
    pub fn concatenated(&self, next: &DiscretePath, segments: usize) -> Result<Self> {
        if next.bodies != self.bodies || next.dim != self.dim {
            return Err(Error::shape(
                format!("{}x{} path", self.bodies, self.dim),
                format!("{}x{}", next.bodies, next.dim),
            ));
        }
        if segments < 2 {
            return Err(Error::InvalidParameter("a path needs at least two segments".into()));
        }
        let joint = self.node_coords(self.segments());
        let scale = 1.0 + joint.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        if joint
            .iter()
            .zip(next.node_coords(0))
            .any(|(a, b)| (a - b).abs() > 1e-9 * scale)
        {
            return Err(Error::Precondition("paths do not meet".into()));
        }
        let split = self.duration;
        let duration = split + next.duration;
        let mut coords = Vec::with_capacity((segments + 1) * self.stride());
        for k in 0..=segments {
            let t = duration * k as f64 / segments as f64;
            let node = if k == 0 {
                self.start()
            } else if k == segments {
                next.end()
            } else if t <= split {
                self.position_at(t)
            } else {
                next.position_at(t - split)
            };
            coords.extend_from_slice(node.coords());
        }
        Ok(Self::from_raw(self.bodies, self.dim, duration, coords))
    }

    /// Velocities at every node: centred differences inside, and at the ends the
    /// second-order one-sided values consistent with the Verlet recursion,
    /// `v_0 = (gamma_1 - gamma_0) / dt - dt a(gamma_0) / 2` and its mirror image.
    pub fn velocities(&self, p: &PotentialParams) -> Result<Vec<Configuration>> {
        let m = self.segments();
        let dt = self.dt();
        let mut out = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let v = if k == 0 {
                let a = acceleration(&self.node(0), p)?;
                let fd = &(&self.node(1) - &self.node(0)) * (1.0 / dt);
                fd.axpy(-0.5 * dt, &a)
            } else if k == m {
                let a = acceleration(&self.node(m), p)?;
                let fd = &(&self.node(m) - &self.node(m - 1)) * (1.0 / dt);
                fd.axpy(0.5 * dt, &a)
            } else {
                &(&self.node(k + 1) - &self.node(k - 1)) * (0.5 / dt)
            };
            out.push(v);
        }
        Ok(out)
    }

    fn check_params(&self, p: &PotentialParams) -> Result<()> {
        if p.bodies() != self.bodies {
            return Err(Error::shape(format!("{} masses", self.bodies), p.bodies()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    /// Exact kinetic term of the piecewise-linear path plus trapezoidal potential.
    MidpointTrapezoid,
}

/// Value of the discrete action with its three terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    pub value: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub energy_term: f64,
    pub quadrature: Quadrature,
}

/// Gradient of the discrete action with respect to the interior nodes and to `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGradient {
    /// One entry per interior node `gamma_1 .. gamma_{M-1}`.
    pub nodes: Vec<Configuration>,
    pub duration: f64,
}

/// Sums of the discrete action on a raw node buffer.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RawAction {
    /// `sum_k ||gamma_{k+1} - gamma_k||^2`, without the `1/dt`.
    pub squared_steps: f64,
    /// Trapezoidal weights times `U_k`, without the `dt`.
    pub potential_sum: f64,
}

impl RawAction {
    pub fn parts(&self, duration: f64, segments: usize, energy: f64) -> ActionValue {
        let dt = duration / segments as f64;
        let kinetic = self.squared_steps / dt;
        let potential = self.potential_sum * dt;
        let energy_term = energy * duration;
        ActionValue {
            value: kinetic + potential + energy_term,
            kinetic,
            potential,
            energy_term,
            quadrature: Quadrature::MidpointTrapezoid,
        }
    }

    /// `dA/dT` at fixed nodes.
    pub fn duration_derivative(&self, duration: f64, segments: usize, energy: f64) -> f64 {
        let parts = self.parts(duration, segments, energy);
        (parts.potential - parts.kinetic) / duration + energy
    }
}

/// Evaluates the discrete action sums over a full node buffer. When `grad` is given it
/// receives `dA/dgamma_k` for the interior nodes (flat, `(M - 1) * N * n` entries).
///
/// `Err((k, i, j))` reports a collision of bodies `i` and `j` at node `k`.
pub(crate) fn raw_action(
    coords: &[f64],
    dim: usize,
    alpha: f64,
    masses: &[f64],
    duration: f64,
    grad: Option<&mut [f64]>,
) -> std::result::Result<RawAction, (usize, usize, usize)> {
    let stride = masses.len() * dim;
    let segments = coords.len() / stride - 1;
    let dt = duration / segments as f64;
    let mut squared_steps = 0.0;
    for k in 0..segments {
        let (a, b) = (
            &coords[k * stride..(k + 1) * stride],
            &coords[(k + 1) * stride..(k + 2) * stride],
        );
        let mut s = 0.0;
        for (i, mi) in masses.iter().enumerate() {
            let d: f64 = (0..dim)
                .map(|c| {
                    let q = b[i * dim + c] - a[i * dim + c];
                    q * q
                })
                .sum();
            s += mi * d;
        }
        squared_steps += 0.5 * s;
    }
    let mut potential_sum = 0.0;
    for k in [0, segments] {
        let u = raw_potential(&coords[k * stride..(k + 1) * stride], dim, alpha, masses).map_err(|(i, j)| (k, i, j))?;
        potential_sum += 0.5 * u;
    }
    match grad {
        None => {
            for k in 1..segments {
                potential_sum += raw_potential(&coords[k * stride..(k + 1) * stride], dim, alpha, masses)
                    .map_err(|(i, j)| (k, i, j))?;
            }
        }
        Some(g) => {
            debug_assert_eq!(g.len(), (segments - 1) * stride);
            for k in 1..segments {
                let out = &mut g[(k - 1) * stride..k * stride];
                let node = &coords[k * stride..(k + 1) * stride];
                potential_sum += raw_accel(node, dim, alpha, masses, out).map_err(|(i, j)| (k, i, j))?;
                for (i, mi) in masses.iter().enumerate() {
                    for c in 0..dim {
                        let idx = i * dim + c;
                        let lap = 2.0 * node[idx] - coords[(k - 1) * stride + idx] - coords[(k + 1) * stride + idx];
                        out[idx] = mi * (lap / dt + dt * out[idx]);
                    }
                }
            }
        }
    }
    Ok(RawAction {
        squared_steps,
        potential_sum,
    })
}

fn check_energy(energy: f64) -> Result<()> {
    if energy > 0.0 && energy.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "energy must be positive, got {energy}"
        )))
    }
}

fn collision_error((_node, i, j): (usize, usize, usize)) -> Error {
    Error::Collision { i, j }
}

/// The discrete action of `path` at energy `energy`.
pub fn path_action(path: &DiscretePath, energy: f64, p: &PotentialParams) -> Result<ActionValue> {
    check_energy(energy)?;
    path.check_params(p)?;
    let raw = raw_action(
        path.coords(),
        path.dim,
        p.alpha(),
        p.masses().as_slice(),
        path.duration,
        None,
    )
    .map_err(collision_error)?;
    Ok(raw.parts(path.duration, path.segments(), energy))
}

/// Exact gradient of [`path_action`] with respect to the interior nodes and the duration.
pub fn path_action_gradient(path: &DiscretePath, energy: f64, p: &PotentialParams) -> Result<ActionGradient> {
    check_energy(energy)?;
    path.check_params(p)?;
    let stride = path.stride();
    let m = path.segments();
    let mut g = vec![0.0; (m - 1) * stride];
    let raw = raw_action(
        path.coords(),
        path.dim,
        p.alpha(),
        p.masses().as_slice(),
        path.duration,
        Some(&mut g),
    )
    .map_err(collision_error)?;
    let nodes = g
        .chunks_exact(stride)
        .map(|c| Configuration::from_raw(path.bodies, path.dim, c.to_vec()))
        .collect();
    Ok(ActionGradient {
        nodes,
        duration: raw.duration_derivative(path.duration, m, energy),
    })
}

/// `max_k ||(gamma_{k+1} - 2 gamma_k + gamma_{k-1}) / dt^2 - a(gamma_k)||` over interior nodes.
pub fn el_residual(path: &DiscretePath, p: &PotentialParams) -> Result<f64> {
    path.check_params(p)?;
    let (dim, stride, m) = (path.dim, path.stride(), path.segments());
    let dt2 = path.dt() * path.dt();
    let masses = p.masses().as_slice();
    let mut acc = vec![0.0; stride];
    let mut r = vec![0.0; stride];
    let mut worst: f64 = 0.0;
    for k in 1..m {
        raw_accel(path.node_coords(k), dim, p.alpha(), masses, &mut acc).map_err(|(i, j)| Error::Collision { i, j })?;
        let (prev, node, next) = (path.node_coords(k - 1), path.node_coords(k), path.node_coords(k + 1));
        for idx in 0..stride {
            r[idx] = (next[idx] - 2.0 * node[idx] + prev[idx]) / dt2 - acc[idx];
        }
        worst = worst.max(raw_norm_sq(&r, dim, masses).sqrt());
    }
    Ok(worst)
}

/// Estimated truncation error of the centred second difference, `dt^2 |gamma''''| / 12`,
/// with the fourth derivative taken from five-node differences. Zero for `M < 4`.
pub fn discretization_error_estimate(path: &DiscretePath, m: &MassVector) -> f64 {
    let segs = path.segments();
    if segs < 4 {
        return 0.0;
    }
    let (dim, stride) = (path.dim, path.stride());
    let dt2 = path.dt() * path.dt();
    let mut d4 = vec![0.0; stride];
    let mut worst: f64 = 0.0;
    for k in 2..segs - 1 {
        for (idx, d) in d4.iter_mut().enumerate() {
            *d = path.node_coords(k - 2)[idx] - 4.0 * path.node_coords(k - 1)[idx] + 6.0 * path.node_coords(k)[idx]
                - 4.0 * path.node_coords(k + 1)[idx]
                + path.node_coords(k + 2)[idx];
        }
        worst = worst.max(raw_norm_sq(&d4, dim, m.as_slice()).sqrt() / (12.0 * dt2));
    }
    worst
}

/// Kinetic minus potential energy at each interior node, velocities by centred differences.
pub fn energy_profile(path: &DiscretePath, p: &PotentialParams) -> Result<Vec<f64>> {
    path.check_params(p)?;
    let (dim, stride, m) = (path.dim, path.stride(), path.segments());
    let masses = p.masses().as_slice();
    let inv = 0.5 / path.dt();
    let mut v = vec![0.0; stride];
    (1..m)
        .map(|k| {
            for (idx, vi) in v.iter_mut().enumerate() {
                *vi = (path.node_coords(k + 1)[idx] - path.node_coords(k - 1)[idx]) * inv;
            }
            let u = raw_potential(path.node_coords(k), dim, p.alpha(), masses)
                .map_err(|(i, j)| Error::Collision { i, j })?;
            Ok(raw_norm_sq(&v, dim, masses) - u)
        })
        .collect()
}

/// Integrates the equations of motion from the first node with the Verlet-consistent
/// initial velocity over the path's duration and returns `||x(T) - gamma_M||`.
pub fn reintegration_error(path: &DiscretePath, p: &PotentialParams, ctrl: &ToleranceSettings) -> Result<f64> {
    let v0 = path.velocities(p)?.swap_remove(0);
    let s0 = PhasePoint::new(path.start(), v0)?;
    let traj = integrate(&s0, p, path.duration(), ctrl)?;
    if !traj.completed() {
        return Err(Error::Precondition(format!(
            "re-integration stopped early: {:?}",
            traj.status
        )));
    }
    weighted_norm(&(&traj.last().x - &path.end()), p.masses())
}

/// Lower bound `2 sqrt(E) ||x - y||` on the action of any path from `x` to `y`.
pub fn maupertuis_bound(x: &Configuration, y: &Configuration, energy: f64, m: &MassVector) -> Result<f64> {
    Ok(2.0 * energy.sqrt() * weighted_norm(&(x - y), m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(alpha: f64, m: &[f64]) -> PotentialParams {
        PotentialParams::new(alpha, MassVector::new(m.to_vec()).unwrap()).unwrap()
    }

    fn cfg(points: &[[f64; 2]]) -> Configuration {
        Configuration::from_points(points).unwrap()
    }

    #[test]
    fn constant_path_action() {
        let p = params(0.5, &[1.0, 2.0]);
        let x = cfg(&[[0.0, 0.0], [4.0, 0.0]]);
        let path = DiscretePath::straight(&x, &x, 3.0, 10).unwrap();
        let u = crate::dynamics::potential(&x, &p).unwrap();
        let a = path_action(&path, 1.5, &p).unwrap();
        assert_relative_eq!(a.value, 3.0 * (u + 1.5), max_relative = 1e-14);
        assert_eq!(a.kinetic, 0.0);
    }

    #[test]
    fn action_rejects_bad_input() {
        let p = params(0.5, &[1.0, 1.0]);
        let x = cfg(&[[0.0, 0.0], [1.0, 0.0]]);
        let y = cfg(&[[1.0, 0.0], [0.0, 0.0]]);
        let path = DiscretePath::straight(&x, &y, 1.0, 4).unwrap();
        // The straight swap passes through a collision at the midpoint node.
        assert!(matches!(path_action(&path, 1.0, &p), Err(Error::Collision { .. })));
        let ok = DiscretePath::straight(&x, &x, 1.0, 4).unwrap();
        assert!(path_action(&ok, 0.0, &p).is_err());
        assert!(DiscretePath::straight(&x, &y, 1.0, 1).is_err());
        assert!(DiscretePath::straight(&x, &y, -1.0, 4).is_err());
    }

    #[test]
    fn reversal_preserves_action() {
        let p = params(0.3, &[1.0, 2.0, 1.5]);
        let nodes: Vec<Configuration> = (0..=7)
            .map(|k| {
                let t = k as f64;
                Configuration::from_points(&[[t, 0.1 * t * t], [3.0 - t, 1.0], [0.5, -2.0 + 0.3 * t]]).unwrap()
            })
            .collect();
        let path = DiscretePath::new(2.5, &nodes).unwrap();
        let a = path_action(&path, 0.7, &p).unwrap().value;
        let b = path_action(&path.reversed(), 0.7, &p).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert_eq!(path.reversed().reversed(), path);
    }

    #[test]
    fn interpolation_reproduces_nodes_and_cubics() {
        let nodes: Vec<Configuration> = (0..=6)
            .map(|k| {
                let t = k as f64 * 0.5;
                cfg(&[[t * t * t, t], [1.0 + t * t, -t]])
            })
            .collect();
        let path = DiscretePath::new(3.0, &nodes).unwrap();
        for (k, node) in nodes.iter().enumerate() {
            assert_eq!(path.position_at(k as f64 * 0.5).coords(), node.coords());
        }
        let t: f64 = 1.3;
        let mid = path.position_at(t);
        assert_relative_eq!(mid.coords()[0], t.powi(3), max_relative = 1e-12);
        assert_relative_eq!(mid.coords()[2], 1.0 + t * t, max_relative = 1e-12);
        let fine = path.resampled(12).unwrap();
        assert_relative_eq!(fine.node(5).coords()[0], 1.25f64.powi(3), max_relative = 1e-12);
    }

    #[test]
    fn stationary_two_body_path_has_small_residual() {
        // A constant-velocity path feels only the potential: the residual is |a|.
        let p = params(0.5, &[1.0, 1.0]);
        let x = cfg(&[[0.0, 0.0], [1.0, 0.0]]);
        let y = cfg(&[[0.0, 1.0], [1.0, 1.0]]);
        let path = DiscretePath::straight(&x, &y, 1.0, 8).unwrap();
        let res = el_residual(&path, &p).unwrap();
        // |a_i| = 0.5 for both bodies at unit separation, weighted norm sqrt(1/2 (0.25 + 0.25)).
        assert_relative_eq!(res, 0.5, max_relative = 1e-12);
    }
}
