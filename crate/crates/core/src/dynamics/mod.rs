//! Weak-force potential `U(x) = sum_{i<j} m_i m_j / |x_i - x_j|^alpha`, its forces and
//! the energy bookkeeping of the equations of motion `m_i x_i'' = dU/dx_i`.

mod integrate;

pub use integrate::{
    integrate, integrate_leapfrog, integrate_with_stops, IntegrationStatus, ToleranceSettings, Trajectory,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{raw_norm_sq, Configuration, MassVector};

/// Homogeneity exponent and masses of the potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    alpha: f64,
    masses: MassVector,
}

impl PotentialParams {
    pub fn new(alpha: f64, masses: MassVector) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(Self { alpha, masses })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn masses(&self) -> &MassVector {
        &self.masses
    }

    pub fn bodies(&self) -> usize {
        self.masses.len()
    }

    fn check(&self, x: &Configuration) -> Result<()> {
        x.check_masses(&self.masses)
    }
}

/// Position and velocity of every body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Configuration,
    pub v: Configuration,
}

impl PhasePoint {
    pub fn new(x: Configuration, v: Configuration) -> Result<Self> {
        x.check_shape(&v)?;
        Ok(Self { x, v })
    }
}

/// Potential on a raw row-major buffer; `Err` names the first colliding pair.
pub(crate) fn raw_potential(x: &[f64], dim: usize, alpha: f64, m: &[f64]) -> std::result::Result<f64, (usize, usize)> {
    let bodies = m.len();
    let mut u = 0.0;
    for i in 0..bodies {
        let xi = &x[i * dim..(i + 1) * dim];
        for j in i + 1..bodies {
            let xj = &x[j * dim..(j + 1) * dim];
            let r2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
            if r2 == 0.0 {
                return Err((i, j));
            }
            u += m[i] * m[j] * r2.powf(-0.5 * alpha);
        }
    }
    Ok(u)
}

/// Writes `a_i = alpha sum_{j != i} m_j (x_j - x_i) / |x_j - x_i|^(alpha + 2)` into `out`
/// and returns the potential, which shares the pairwise powers.
pub(crate) fn raw_accel(
    x: &[f64],
    dim: usize,
    alpha: f64,
    m: &[f64],
    out: &mut [f64],
) -> std::result::Result<f64, (usize, usize)> {
    let bodies = m.len();
    out.iter_mut().for_each(|o| *o = 0.0);
    let mut u = 0.0;
    let mut diff = [0.0f64; 8];
    let mut heap;
    let d: &mut [f64] = if dim <= diff.len() {
        &mut diff[..dim]
    } else {
        heap = vec![0.0; dim];
        &mut heap
    };
    for i in 0..bodies {
        for j in i + 1..bodies {
            let mut r2 = 0.0;
            for k in 0..dim {
                d[k] = x[j * dim + k] - x[i * dim + k];
                r2 += d[k] * d[k];
            }
            if r2 == 0.0 {
                return Err((i, j));
            }
            let inv_pow = r2.powf(-0.5 * alpha);
            u += m[i] * m[j] * inv_pow;
            let coef = alpha * inv_pow / r2;
            for k in 0..dim {
                out[i * dim + k] += coef * m[j] * d[k];
                out[j * dim + k] -= coef * m[i] * d[k];
            }
        }
    }
    Ok(u)
}

/// `U(x)`; errors at collisions.
pub fn potential(x: &Configuration, p: &PotentialParams) -> Result<f64> {
    p.check(x)?;
    raw_potential(x.coords(), x.dim(), p.alpha, p.masses.as_slice()).map_err(|(i, j)| Error::Collision { i, j })
}

/// Per-body accelerations `a_i`, so that `m_i a_i = dU/dx_i`.
pub fn acceleration(x: &Configuration, p: &PotentialParams) -> Result<Configuration> {
    p.check(x)?;
    let mut out = vec![0.0; x.coords().len()];
    raw_accel(x.coords(), x.dim(), p.alpha, p.masses.as_slice(), &mut out)
        .map_err(|(i, j)| Error::Collision { i, j })?;
    Ok(Configuration::from_raw(x.bodies(), x.dim(), out))
}

/// Kinetic energy `||v||^2 = 1/2 sum_i m_i |v_i|^2`.
pub fn kinetic_energy(s: &PhasePoint, p: &PotentialParams) -> Result<f64> {
    p.check(&s.v)?;
    Ok(raw_norm_sq(s.v.coords(), s.v.dim(), p.masses.as_slice()))
}

/// `L(x, v) = ||v||^2 + U(x)`.
pub fn lagrangian(s: &PhasePoint, p: &PotentialParams) -> Result<f64> {
    Ok(kinetic_energy(s, p)? + potential(&s.x, p)?)
}

/// Energy integral `h = ||v||^2 - U(x)`.
pub fn total_energy(s: &PhasePoint, p: &PotentialParams) -> Result<f64> {
    Ok(kinetic_energy(s, p)? - potential(&s.x, p)?)
}

/// Total linear momentum `sum_i m_i v_i`.
pub fn linear_momentum(s: &PhasePoint, m: &MassVector) -> Vec<f64> {
    let dim = s.v.dim();
    let mut total = vec![0.0; dim];
    for i in 0..s.v.bodies() {
        for (t, vi) in total.iter_mut().zip(s.v.point(i)) {
            *t += m[i] * vi;
        }
    }
    total
}

/// Angular momentum bivector `sum_i m_i (x_i^k v_i^l - x_i^l v_i^k)` for `k < l`,
/// in lexicographic order of `(k, l)`.
pub fn angular_momentum(s: &PhasePoint, m: &MassVector) -> Vec<f64> {
    let dim = s.x.dim();
    let mut out = Vec::with_capacity(dim * (dim - 1) / 2);
    for k in 0..dim {
        for l in k + 1..dim {
            let mut c = 0.0;
            for i in 0..s.x.bodies() {
                let (x, v) = (s.x.point(i), s.v.point(i));
                c += m[i] * (x[k] * v[l] - x[l] * v[k]);
            }
            out.push(c);
        }
    }
    out
}

/// Circular relative orbit of two bodies around their centre of mass.
///
/// The relative coordinate `z = x_2 - x_1` obeys `z'' = -alpha (m_1 + m_2) z / |z|^(alpha + 2)`,
/// so a circle of radius `separation` needs angular velocity
/// `omega^2 = alpha (m_1 + m_2) separation^(-alpha - 2)`. Returns the phase point and the period.
pub fn circular_two_body(p: &PotentialParams, separation: f64, dim: usize) -> Result<(PhasePoint, f64)> {
    if p.bodies() != 2 {
        return Err(Error::InvalidParameter(
            "circular preset needs exactly two bodies".into(),
        ));
    }
    if !(separation > 0.0) || dim < 2 {
        return Err(Error::InvalidParameter(
            "separation must be positive and dimension at least 2".into(),
        ));
    }
    let (m1, m2) = (p.masses[0], p.masses[1]);
    let total = m1 + m2;
    let omega = (p.alpha * total * separation.powf(-p.alpha - 2.0)).sqrt();
    let speed = omega * separation;
    let mut x = vec![0.0; 2 * dim];
    let mut v = vec![0.0; 2 * dim];
    x[0] = -m2 / total * separation;
    x[dim] = m1 / total * separation;
    v[1] = -m2 / total * speed;
    v[dim + 1] = m1 / total * speed;
    let state = PhasePoint::new(Configuration::new(2, dim, x)?, Configuration::new(2, dim, v)?)?;
    Ok((state, 2.0 * std::f64::consts::PI / omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(alpha: f64, m: &[f64]) -> PotentialParams {
        PotentialParams::new(alpha, MassVector::new(m.to_vec()).unwrap()).unwrap()
    }

    fn cfg(points: &[[f64; 2]]) -> Configuration {
        Configuration::from_points(points).unwrap()
    }

    #[test]
    fn alpha_range_is_open() {
        let m = MassVector::equal(2).unwrap();
        assert!(PotentialParams::new(0.0, m.clone()).is_err());
        assert!(PotentialParams::new(1.0, m.clone()).is_err());
        assert!(PotentialParams::new(f64::NAN, m.clone()).is_err());
        assert!(PotentialParams::new(0.999, m).is_ok());
    }

    #[test]
    fn potential_examples() {
        let p = params(0.5, &[1.0, 1.0]);
        assert_eq!(potential(&cfg(&[[0.0, 0.0], [1.0, 0.0]]), &p).unwrap(), 1.0);
        assert_eq!(potential(&cfg(&[[0.0, 0.0], [4.0, 0.0]]), &p).unwrap(), 0.5);
        assert_eq!(
            potential(&cfg(&[[1.0, 1.0], [1.0, 1.0]]), &p),
            Err(Error::Collision { i: 0, j: 1 })
        );
    }

    #[test]
    fn acceleration_at_unit_separation() {
        let p = params(0.5, &[1.0, 1.0]);
        let a = acceleration(&cfg(&[[0.0, 0.0], [1.0, 0.0]]), &p).unwrap();
        assert_abs_diff_eq!(a.coords(), &[0.5, 0.0, -0.5, 0.0][..], epsilon = 1e-15);
    }

    #[test]
    fn equilateral_accelerations_point_at_centroid() {
        let p = params(0.4, &[1.0, 1.0, 1.0]);
        let s3 = 3f64.sqrt();
        let x = cfg(&[[1.0, 0.0], [-0.5, 0.5 * s3], [-0.5, -0.5 * s3]]);
        let a = acceleration(&x, &p).unwrap();
        let mags: Vec<f64> = (0..3).map(|i| crate::space::euclid_norm(a.point(i))).collect();
        for i in 0..3 {
            assert_abs_diff_eq!(mags[i], mags[0], epsilon = 1e-14);
            // a_i is antiparallel to x_i since the centroid is the origin.
            let cross = a.point(i)[0] * x.point(i)[1] - a.point(i)[1] * x.point(i)[0];
            let dot: f64 = a.point(i).iter().zip(x.point(i)).map(|(p, q)| p * q).sum();
            assert_abs_diff_eq!(cross, 0.0, epsilon = 1e-14);
            assert!(dot < 0.0);
        }
    }

    #[test]
    fn lagrangian_and_energy_examples() {
        let p = params(0.5, &[1.0, 1.0]);
        let x = cfg(&[[0.0, 0.0], [1.0, 0.0]]);
        let rest = PhasePoint::new(x.clone(), Configuration::zeros(2, 2)).unwrap();
        assert_eq!(lagrangian(&rest, &p).unwrap(), 1.0);
        assert_eq!(total_energy(&rest, &p).unwrap(), -1.0);
        let moving = PhasePoint::new(x.clone(), cfg(&[[1.0, 0.0], [-1.0, 0.0]])).unwrap();
        assert_eq!(lagrangian(&moving, &p).unwrap(), 2.0);
        assert_eq!(total_energy(&moving, &p).unwrap(), 0.0);
        let reversed = PhasePoint::new(x, cfg(&[[-1.0, 0.0], [1.0, 0.0]])).unwrap();
        assert_eq!(lagrangian(&reversed, &p).unwrap(), lagrangian(&moving, &p).unwrap());
    }

    #[test]
    fn circular_preset_balances_forces() {
        let p = params(0.5, &[1.0, 3.0]);
        let (s, period) = circular_two_body(&p, 2.0, 3).unwrap();
        let a = acceleration(&s.x, &p).unwrap();
        // Centripetal: |a_i| = |v_i|^2 / |x_i|.
        for i in 0..2 {
            let v2: f64 = s.v.point(i).iter().map(|c| c * c).sum();
            let r = crate::space::euclid_norm(s.x.point(i));
            assert_abs_diff_eq!(crate::space::euclid_norm(a.point(i)), v2 / r, epsilon = 1e-14);
        }
        assert!(period > 0.0);
        assert_eq!(linear_momentum(&s, p.masses()), vec![0.0; 3]);
    }
}
