use proptest::prelude::*;
use weakforce::dynamics::{
    acceleration, angular_momentum, circular_two_body, integrate, linear_momentum, potential, total_energy, PhasePoint,
    PotentialParams, ToleranceSettings,
};
use weakforce::space::{
    angle, max_separation, min_separation, normalize_to_sphere, weighted_inner, weighted_norm, Configuration,
    MassVector,
};

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (
        prop::sample::select(vec![2usize, 3, 5]),
        prop::sample::select(vec![2usize, 3]),
    )
}

fn masses(bodies: usize) -> impl Strategy<Value = MassVector> {
    prop::collection::vec(1.0f64..10.0, bodies).prop_map(|m| MassVector::new(m).unwrap())
}

fn config(bodies: usize, dim: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(-3.0f64..3.0, bodies * dim).prop_map(move |c| Configuration::new(bodies, dim, c).unwrap())
}

/// A configuration with masses and two further configurations of the same shape.
fn triple() -> impl Strategy<Value = (MassVector, Configuration, Configuration, Configuration)> {
    shape().prop_flat_map(|(b, d)| (masses(b), config(b, d), config(b, d), config(b, d)))
}

/// Collision-free configuration with `r(x) >= 0.2`.
fn separated(bodies: usize, dim: usize) -> impl Strategy<Value = Configuration> {
    config(bodies, dim).prop_filter("bodies too close", |x| min_separation(x) >= 0.2)
}

fn params() -> impl Strategy<Value = (PotentialParams, Configuration)> {
    (shape(), prop::sample::select(vec![0.3, 0.5, 0.8])).prop_flat_map(|((b, d), alpha)| {
        (masses(b), separated(b, d)).prop_map(move |(m, x)| (PotentialParams::new(alpha, m).unwrap(), x))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cauchy_schwarz((m, x, y, _) in triple()) {
        let lhs = weighted_inner(&x, &y, &m).unwrap().abs();
        let rhs = weighted_norm(&x, &m).unwrap() * weighted_norm(&y, &m).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn inner_product_polarizes_the_norm((m, x, y, _) in triple()) {
        let s = weighted_norm(&(&x + &y), &m).unwrap().powi(2);
        let d = weighted_norm(&(&x - &y), &m).unwrap().powi(2);
        let inner = weighted_inner(&x, &y, &m).unwrap();
        prop_assert!((0.25 * (s - d) - inner).abs() <= 1e-12 * (1.0 + s + d));
    }

    #[test]
    fn chord_identity_on_the_sphere((m, x, y, _) in triple()) {
        prop_assume!(weighted_norm(&x, &m).unwrap() > 1e-3 && weighted_norm(&y, &m).unwrap() > 1e-3);
        let u = normalize_to_sphere(&x, &m).unwrap();
        let v = normalize_to_sphere(&y, &m).unwrap();
        let half_chord = 0.5 * weighted_norm(&(u.config() - v.config()), &m).unwrap();
        let theta = angle(&u, &v, &m).unwrap();
        prop_assert!((half_chord - (0.5 * theta).sin()).abs() <= 1e-10);
        // agrees with the arccos of the clamped cosine away from the ends
        let cos = weighted_inner(&u, &v, &m).unwrap().clamp(-1.0, 1.0);
        if cos.abs() < 0.99 {
            prop_assert!((cos.acos() - theta).abs() <= 1e-10);
        }
    }

    #[test]
    fn norm_triangle_inequality((m, x, y, z) in triple()) {
        let xz = weighted_norm(&(&x - &z), &m).unwrap();
        let xy = weighted_norm(&(&x - &y), &m).unwrap();
        let yz = weighted_norm(&(&y - &z), &m).unwrap();
        prop_assert!(xz <= (xy + yz) * (1.0 + 1e-12));
    }

    #[test]
    fn separations_are_ordered_and_homogeneous((_, x, _, _) in triple(), lambda in 1e-3f64..1e3) {
        prop_assert!(min_separation(&x) <= max_separation(&x));
        let scaled = x.scaled(lambda);
        prop_assert!((min_separation(&scaled) - lambda * min_separation(&x)).abs() <= 1e-12 * lambda * max_separation(&x));
        prop_assert!((max_separation(&scaled) - lambda * max_separation(&x)).abs() <= 1e-12 * lambda * max_separation(&x));
    }

    #[test]
    fn force_is_the_weighted_gradient((p, x) in params()) {
        let a = acceleration(&x, &p).unwrap();
        let h = 1e-5;
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in 0..x.coords().len() {
            let i = k / x.dim();
            let mut plus = x.clone();
            plus.coords_mut()[k] += h;
            let mut minus = x.clone();
            minus.coords_mut()[k] -= h;
            let fd = (potential(&plus, &p).unwrap() - potential(&minus, &p).unwrap()) / (2.0 * h);
            let exact = p.masses()[i] * a.coords()[k];
            err = err.max((fd - exact).abs());
            scale = scale.max(exact.abs());
        }
        prop_assert!(err <= 1e-6 * scale, "err {err} scale {scale}");
    }

    #[test]
    fn potential_and_force_are_homogeneous((p, x) in params(), lambda in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let alpha = p.alpha();
        let u = potential(&x, &p).unwrap();
        let ul = potential(&x.scaled(lambda), &p).unwrap();
        prop_assert!((ul - lambda.powf(-alpha) * u).abs() <= 1e-12 * ul.abs());
        let a = acceleration(&x, &p).unwrap();
        let al = acceleration(&x.scaled(lambda), &p).unwrap();
        let factor = lambda.powf(-(alpha + 1.0));
        let norm = a.coords().iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for (v, w) in a.coords().iter().zip(al.coords()) {
            prop_assert!((w - factor * v).abs() <= 1e-12 * factor * norm);
        }
    }

    #[test]
    fn newtons_third_law((p, x) in params()) {
        let a = acceleration(&x, &p).unwrap();
        for k in 0..x.dim() {
            let total: f64 = (0..x.bodies()).map(|i| p.masses()[i] * a.point(i)[k]).sum();
            let scale: f64 = (0..x.bodies()).map(|i| (p.masses()[i] * a.point(i)[k]).abs()).sum();
            prop_assert!(total.abs() <= 1e-12 * (1.0 + scale));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Spread-out three-body systems with moderate velocities, integrated over `[0, 10]`.
    #[test]
    fn integration_conserves_first_integrals(
        m in masses(3),
        x in config(3, 2).prop_map(|x| x.scaled(2.0)).prop_filter("close", |x| min_separation(x) >= 1.5),
        v in config(3, 2).prop_map(|v| v.scaled(0.1)),
    ) {
        let p = PotentialParams::new(0.5, m.clone()).unwrap();
        let start = PhasePoint::new(x, v).unwrap();
        let traj = integrate(&start, &p, 10.0, &ToleranceSettings::default()).unwrap();
        prop_assume!(traj.completed());
        let e0 = total_energy(&start, &p).unwrap();
        let rel = traj.max_energy_drift();
        prop_assert!(rel <= 1e-8, "energy drift {rel} (E0 = {e0})");
        prop_assert!(traj.max_momentum_drift(&p) <= 1e-10);
        prop_assert!(traj.max_angular_momentum_drift(&p) <= 1e-8);
        let p0 = linear_momentum(&start, &m);
        let p1 = linear_momentum(traj.last(), &m);
        for (a, b) in p0.iter().zip(&p1) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let l0 = angular_momentum(&start, &m);
        let l1 = angular_momentum(traj.last(), &m);
        for (a, b) in l0.iter().zip(&l1) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
        }
    }
}

#[test]
fn circular_orbit_keeps_its_radius() {
    for alpha in [0.3, 0.5, 0.8] {
        let p = PotentialParams::new(alpha, MassVector::new(vec![1.0, 1.0]).unwrap()).unwrap();
        let (start, period) = circular_two_body(&p, 1.0, 2).unwrap();
        let traj = integrate(&start, &p, period, &ToleranceSettings::default()).unwrap();
        assert!(traj.completed());
        for s in &traj.states {
            assert!((s.x.body_distance(0, 1) - 1.0).abs() <= 1e-6);
        }
    }
}

#[test]
fn symmetric_rest_start_stays_symmetric() {
    // equilateral triangle with equal masses collapses homothetically
    let x = Configuration::from_points(&[[1.0, 0.0], [-0.5, 0.75f64.sqrt()], [-0.5, -(0.75f64.sqrt())]]).unwrap();
    let p = PotentialParams::new(0.5, MassVector::equal(3).unwrap()).unwrap();
    let start = PhasePoint::new(x, Configuration::zeros(3, 2)).unwrap();
    let traj = integrate(&start, &p, 0.5, &ToleranceSettings::default()).unwrap();
    for s in &traj.states {
        let d01 = s.x.body_distance(0, 1);
        assert!((d01 - s.x.body_distance(1, 2)).abs() <= 1e-10 * d01);
        assert!((d01 - s.x.body_distance(0, 2)).abs() <= 1e-10 * d01);
        assert!(s.x.point(0)[1].abs() <= 1e-12);
    }
}
