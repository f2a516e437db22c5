//! Mass-weighted Euclidean geometry of the configuration space `E^N`.
//!
//! A configuration holds `N` points of `R^n` in a flat row-major buffer. The
//! norm is `||x|| = (1/2 sum_i m_i |x_i|^2)^(1/2)` and the inner product is the
//! bilinear form whose quadratic form is `||x||^2`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive body masses, normalized so that the smallest mass is exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassVector(Vec<f64>);

impl MassVector {
    /// Validates and normalizes the masses (divides by the minimum).
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "at least two bodies are required, got {}",
                masses.len()
            )));
        }
        if let Some(bad) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "masses must be positive and finite, got {bad}"
            )));
        }
        let min = masses.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self(masses.into_iter().map(|m| m / min).collect()))
    }

    pub fn equal(bodies: usize) -> Result<Self> {
        Self::new(vec![1.0; bodies])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for MassVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `N` points in `R^n`, stored row-major (`coords[i * n + k]` is coordinate `k` of body `i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    bodies: usize,
    dim: usize,
    coords: Vec<f64>,
}

impl Configuration {
    pub fn new(bodies: usize, dim: usize, coords: Vec<f64>) -> Result<Self> {
        if bodies < 2 {
            return Err(Error::InvalidParameter(format!(
                "at least two bodies are required, got {bodies}"
            )));
        }
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "ambient dimension must be at least 2, got {dim}"
            )));
        }
        if coords.len() != bodies * dim {
            return Err(Error::shape(format!("{} coordinates", bodies * dim), coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "configuration coordinates must be finite".into(),
            ));
        }
        Ok(Self { bodies, dim, coords })
    }

    /// Builds a configuration from one row per body.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.as_ref().len());
        if let Some(p) = points.iter().find(|p| p.as_ref().len() != dim) {
            return Err(Error::shape(format!("{dim} coordinates per body"), p.as_ref().len()));
        }
        let coords = points.iter().flat_map(|p| p.as_ref().iter().copied()).collect();
        Self::new(points.len(), dim, coords)
    }

    pub fn zeros(bodies: usize, dim: usize) -> Self {
        Self {
            bodies,
            dim,
            coords: vec![0.0; bodies * dim],
        }
    }

    /// Unchecked constructor for buffers produced inside the crate.
    pub(crate) fn from_raw(bodies: usize, dim: usize, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), bodies * dim);
        Self { bodies, dim, coords }
    }

    pub fn bodies(&self) -> usize {
        self.bodies
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn same_shape(&self, other: &Configuration) -> bool {
        self.bodies == other.bodies && self.dim == other.dim
    }

    pub(crate) fn check_shape(&self, other: &Configuration) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::shape(
                format!("{}x{}", self.bodies, self.dim),
                format!("{}x{}", other.bodies, other.dim),
            ))
        }
    }

    pub(crate) fn check_masses(&self, m: &MassVector) -> Result<()> {
        if m.len() == self.bodies {
            Ok(())
        } else {
            Err(Error::shape(format!("{} masses", self.bodies), m.len()))
        }
    }

    pub fn scaled(&self, factor: f64) -> Configuration {
        let coords = self.coords.iter().map(|c| c * factor).collect();
        Self::from_raw(self.bodies, self.dim, coords)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Configuration) -> Configuration {
        assert!(self.same_shape(other), "configuration shapes differ");
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + s * b).collect();
        Self::from_raw(self.bodies, self.dim, coords)
    }

    /// Distance `|x_i - x_j|` between two bodies.
    pub fn body_distance(&self, i: usize, j: usize) -> f64 {
        euclid_dist(self.point(i), self.point(j))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.bodies)
            .map(|i| {
                let p: Vec<String> = self.point(i).iter().map(|c| c.to_string()).collect();
                format!("({})", p.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

impl Add for &Configuration {
    type Output = Configuration;
    fn add(self, rhs: &Configuration) -> Configuration {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Configuration {
    type Output = Configuration;
    fn sub(self, rhs: &Configuration) -> Configuration {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &Configuration {
    type Output = Configuration;
    fn mul(self, rhs: f64) -> Configuration {
        self.scaled(rhs)
    }
}

impl Neg for &Configuration {
    type Output = Configuration;
    fn neg(self) -> Configuration {
        self.scaled(-1.0)
    }
}

/// A configuration on the unit sphere `||a|| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitShape(Configuration);

impl UnitShape {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    /// Wraps a configuration that already has unit weighted norm.
    pub fn new(x: Configuration, m: &MassVector) -> Result<Self> {
        let norm = weighted_norm(&x, m)?;
        if (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::Precondition(format!(
                "shape must have unit weighted norm, got {norm}"
            )));
        }
        Ok(Self(x))
    }

    pub fn config(&self) -> &Configuration {
        &self.0
    }

    pub fn into_config(self) -> Configuration {
        self.0
    }
}

impl std::ops::Deref for UnitShape {
    type Target = Configuration;
    fn deref(&self) -> &Configuration {
        &self.0
    }
}

pub(crate) fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

pub(crate) fn euclid_norm(a: &[f64]) -> f64 {
    a.iter().map(|p| p * p).sum::<f64>().sqrt()
}

/// `1/2 sum_i m_i <x_i, y_i>` on raw row-major buffers.
pub(crate) fn raw_inner(x: &[f64], y: &[f64], dim: usize, m: &[f64]) -> f64 {
    0.5 * x
        .chunks_exact(dim)
        .zip(y.chunks_exact(dim))
        .zip(m)
        .map(|((xi, yi), mi)| mi * xi.iter().zip(yi).map(|(a, b)| a * b).sum::<f64>())
        .sum::<f64>()
}

pub(crate) fn raw_norm_sq(x: &[f64], dim: usize, m: &[f64]) -> f64 {
    raw_inner(x, x, dim, m)
}

/// Minimum pairwise distance on a raw buffer.
pub(crate) fn raw_min_separation(x: &[f64], dim: usize) -> f64 {
    let bodies = x.len() / dim;
    let mut best = f64::INFINITY;
    for i in 0..bodies {
        for j in i + 1..bodies {
            best = best.min(euclid_dist(&x[i * dim..(i + 1) * dim], &x[j * dim..(j + 1) * dim]));
        }
    }
    best
}

/// `||x|| = (1/2 sum_i m_i |x_i|^2)^(1/2)`.
pub fn weighted_norm(x: &Configuration, m: &MassVector) -> Result<f64> {
    x.check_masses(m)?;
    Ok(raw_norm_sq(&x.coords, x.dim, m.as_slice()).sqrt())
}

/// `<x, y> = 1/2 sum_i m_i <x_i, y_i>`; symmetric and bilinear, with `<x, x> = ||x||^2`.
pub fn weighted_inner(x: &Configuration, y: &Configuration, m: &MassVector) -> Result<f64> {
    x.check_shape(y)?;
    x.check_masses(m)?;
    Ok(raw_inner(&x.coords, &y.coords, x.dim, m.as_slice()))
}

/// `r(x)`: the smallest distance between two bodies.
pub fn min_separation(x: &Configuration) -> f64 {
    raw_min_separation(&x.coords, x.dim)
}

/// `R(x)`: the largest distance between two bodies.
pub fn max_separation(x: &Configuration) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..x.bodies {
        for j in i + 1..x.bodies {
            best = best.max(x.body_distance(i, j));
        }
    }
    best
}

/// True iff `r(x) > eps`.
pub fn is_collision_free(x: &Configuration, eps: f64) -> bool {
    min_separation(x) > eps
}

/// Radially projects `x` onto the unit sphere.
pub fn normalize_to_sphere(x: &Configuration, m: &MassVector) -> Result<UnitShape> {
    let norm = weighted_norm(x, m)?;
    if norm == 0.0 {
        return Err(Error::ZeroConfiguration);
    }
    let mut unit = x.scaled(1.0 / norm);
    // One refinement pass brings the norm to within a couple of ulps of 1.
    let again = raw_norm_sq(&unit.coords, unit.dim, m.as_slice()).sqrt();
    if again != 1.0 {
        unit = unit.scaled(1.0 / again);
    }
    UnitShape::new(unit, m)
}

/// The angle in `[0, pi]` between two nonzero configurations.
pub fn angle(x: &Configuration, y: &Configuration, m: &MassVector) -> Result<f64> {
    x.check_shape(y)?;
    let nx = weighted_norm(x, m)?;
    let ny = weighted_norm(y, m)?;
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroConfiguration);
    }
    // Chord form, accurate for nearly parallel arguments where acos is not.
    let chord: Vec<f64> = x.coords.iter().zip(&y.coords).map(|(a, b)| a / nx - b / ny).collect();
    let half = 0.5 * raw_norm_sq(&chord, x.dim, m.as_slice()).sqrt();
    Ok(2.0 * half.min(1.0).asin())
}

/// Parametric segment between two configurations, `(1 - s) from + s to`.
///
/// The open variant rejects the endpoints.
#[derive(Debug, Clone)]
pub struct Segment {
    pub from: Configuration,
    pub to: Configuration,
    pub open: bool,
}

impl Segment {
    pub fn closed(from: Configuration, to: Configuration) -> Result<Self> {
        from.check_shape(&to)?;
        Ok(Self { from, to, open: false })
    }

    pub fn open(from: Configuration, to: Configuration) -> Result<Self> {
        from.check_shape(&to)?;
        Ok(Self { from, to, open: true })
    }

    pub fn at(&self, s: f64) -> Result<Configuration> {
        let inside = if self.open {
            s > 0.0 && s < 1.0
        } else {
            (0.0..=1.0).contains(&s)
        };
        if !inside {
            return Err(Error::Precondition(format!("segment parameter {s} out of range")));
        }
        Ok(lerp(&self.from, &self.to, s))
    }
}

/// Parametric ray `origin + t * direction`, for `t > 0` (open) or `t >= 0` (closed).
#[derive(Debug, Clone)]
pub struct Ray {
    pub origin: Configuration,
    pub direction: Configuration,
    pub open: bool,
}

impl Ray {
    pub fn new(origin: Configuration, direction: Configuration, open: bool) -> Result<Self> {
        origin.check_shape(&direction)?;
        Ok(Self {
            origin,
            direction,
            open,
        })
    }

    pub fn at(&self, t: f64) -> Result<Configuration> {
        let inside = if self.open { t > 0.0 } else { t >= 0.0 };
        if !inside || !t.is_finite() {
            return Err(Error::Precondition(format!("ray parameter {t} out of range")));
        }
        Ok(self.origin.axpy(t, &self.direction))
    }
}

/// `(1 - s) x + s y`.
pub fn lerp(x: &Configuration, y: &Configuration, s: f64) -> Configuration {
    assert!(x.same_shape(y), "configuration shapes differ");
    let coords = x
        .coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| (1.0 - s) * a + s * b)
        .collect();
    Configuration::from_raw(x.bodies, x.dim, coords)
}
