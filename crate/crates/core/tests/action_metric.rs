use proptest::prelude::*;
use weakforce::action::{
    el_residual, maupertuis_bound, minimize_fixed_time, minimize_free_time, path_action, path_action_gradient,
    DiscretePath, MinimizeSettings,
};
use weakforce::dynamics::PotentialParams;
use weakforce::metric::{check_positivity_bound, phi_estimate, sample_configuration, tolerance};
use weakforce::rng;
use weakforce::space::{min_separation, Configuration, MassVector};

fn masses(bodies: usize) -> impl Strategy<Value = MassVector> {
    prop::collection::vec(1.0f64..5.0, bodies).prop_map(|m| MassVector::new(m).unwrap())
}

fn config(bodies: usize, dim: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(-2.0f64..2.0, bodies * dim).prop_map(move |c| Configuration::new(bodies, dim, c).unwrap())
}

/// A wiggly collision-free path between random endpoints.
fn path_problem() -> impl Strategy<Value = (PotentialParams, DiscretePath, f64)> {
    let b = 3;
    let d = 2;
    (
        masses(b),
        prop::sample::select(vec![0.3, 0.5, 0.8]),
        config(b, d),
        config(b, d),
        prop::collection::vec(-0.3f64..0.3, b * d * 9),
        0.2f64..3.0,
        0.1f64..4.0,
    )
        .prop_map(move |(m, alpha, x, y, noise, duration, energy)| {
            let straight = DiscretePath::straight(&x, &y, duration, 10).unwrap();
            let mut nodes = straight.nodes();
            for (k, node) in nodes[1..10].iter_mut().enumerate() {
                for (c, n) in node.coords_mut().iter_mut().zip(&noise[k * b * d..(k + 1) * b * d]) {
                    *c += n;
                }
            }
            let path = DiscretePath::new(duration, &nodes).unwrap();
            (PotentialParams::new(alpha, m).unwrap(), path, energy)
        })
        .prop_filter("collision along the path", |(_, path, _)| {
            path.nodes().iter().all(|n| min_separation(n) > 0.05)
        })
}

fn quick_settings() -> MinimizeSettings {
    MinimizeSettings {
        nodes: 100,
        ..Default::default()
    }
}

/// Separated random endpoints, the same sampler the metric suite uses.
fn endpoints(seed: u64, bodies: usize) -> (Configuration, Configuration) {
    let mut r = rng::from_seed(seed);
    let x = sample_configuration(&mut r, bodies, 2, 1.0, 0.3);
    let y = sample_configuration(&mut r, bodies, 2, 1.0, 0.3);
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn action_lower_bounds((p, path, energy) in path_problem()) {
        let a = path_action(&path, energy, &p).unwrap();
        prop_assert!(a.value >= energy * path.duration());
        let bound = maupertuis_bound(&path.start(), &path.end(), energy, p.masses()).unwrap();
        prop_assert!(a.value >= bound * (1.0 - 1e-12));
        prop_assert!((a.kinetic + a.potential + a.energy_term - a.value).abs() <= 1e-12 * a.value);
    }

    #[test]
    fn reversal_preserves_the_action((p, path, energy) in path_problem()) {
        let a = path_action(&path, energy, &p).unwrap().value;
        let b = path_action(&path.reversed(), energy, &p).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn gradient_matches_finite_differences((p, path, energy) in path_problem()) {
        let g = path_action_gradient(&path, energy, &p).unwrap();
        let mut nodes = path.nodes();
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for k in [1usize, 4, 9] {
            for c in 0..nodes[k].coords().len() {
                let orig = nodes[k].coords()[c];
                nodes[k].coords_mut()[c] = orig + h;
                let plus = path_action(&DiscretePath::new(path.duration(), &nodes).unwrap(), energy, &p).unwrap().value;
                nodes[k].coords_mut()[c] = orig - h;
                let minus = path_action(&DiscretePath::new(path.duration(), &nodes).unwrap(), energy, &p).unwrap().value;
                nodes[k].coords_mut()[c] = orig;
                let exact = g.nodes[k - 1].coords()[c];
                worst = worst.max(((plus - minus) / (2.0 * h) - exact).abs());
                scale = scale.max(exact.abs());
            }
        }
        prop_assert!(worst <= 1e-5 * scale, "node gradient error {worst}");
        let t = path.duration();
        let dh = 1e-6 * t;
        let plus = path_action(&path.with_duration(t + dh), energy, &p).unwrap().value;
        let minus = path_action(&path.with_duration(t - dh), energy, &p).unwrap().value;
        let fd = (plus - minus) / (2.0 * dh);
        prop_assert!((fd - g.duration).abs() <= 1e-5 * (1.0 + g.duration.abs()));
    }

    #[test]
    fn rough_paths_are_not_stationary((p, path, _) in path_problem()) {
        let straight = DiscretePath::straight(&path.start(), &path.end(), path.duration(), 10).unwrap();
        prop_assume!(path.nodes().iter().zip(straight.nodes()).any(|(a, b)| {
            a.coords().iter().zip(b.coords()).any(|(u, v)| (u - v).abs() > 0.1)
        }));
        prop_assert!(el_residual(&path, &p).unwrap() > 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn converged_minimizers_are_stationary_and_separated(seed in any::<u64>(), duration in 0.5f64..2.0) {
        let (x, y) = endpoints(seed, 3);
        let p = PotentialParams::new(0.5, MassVector::equal(3).unwrap()).unwrap();
        let s = quick_settings();
        let r = minimize_fixed_time(&x, &y, duration, None, 1.0, &p, &s).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.grad_norm <= s.grad_tol * (1.0 + r.value().abs()));
        prop_assert!(r.min_sep > 0.0);
        prop_assert_eq!(r.path.start(), x);
        prop_assert_eq!(r.path.end(), y);
    }

    #[test]
    fn phi_is_symmetric_and_bounded_below(seed in any::<u64>()) {
        let (x, y) = endpoints(seed, 3);
        let p = PotentialParams::new(0.5, MassVector::new(vec![1.0, 2.0, 1.5]).unwrap()).unwrap();
        let s = quick_settings();
        let xy = phi_estimate(&x, &y, 1.0, &p, &s).unwrap();
        let yx = phi_estimate(&y, &x, 1.0, &p, &s).unwrap();
        prop_assert!(xy.converged && yx.converged);
        prop_assert!((xy.value - yx.value).abs() <= 3.0 * tolerance(xy.value));
        let bound = maupertuis_bound(&x, &y, 1.0, p.masses()).unwrap();
        prop_assert!(xy.value >= bound);
        prop_assert!(check_positivity_bound(&x, &y, &xy.result).unwrap().holds());
    }

    #[test]
    fn phi_increases_with_energy(seed in any::<u64>(), e1 in 0.2f64..2.0, factor in 1.1f64..3.0) {
        let (x, y) = endpoints(seed, 3);
        let p = PotentialParams::new(0.5, MassVector::equal(3).unwrap()).unwrap();
        let s = quick_settings();
        let low = phi_estimate(&x, &y, e1, &p, &s).unwrap();
        let high = phi_estimate(&x, &y, e1 * factor, &p, &s).unwrap();
        prop_assert!(low.converged && high.converged);
        prop_assert!(high.value >= low.value - 3.0 * tolerance(high.value));
    }
}

#[test]
fn free_time_result_reports_transversality() {
    let (x, y) = endpoints(11, 3);
    let p = PotentialParams::new(0.5, MassVector::equal(3).unwrap()).unwrap();
    let s = MinimizeSettings::default();
    let r = minimize_free_time(&x, &y, 2.0, &p, &s).unwrap();
    assert!(r.converged && r.free_time);
    assert!(r.transversal(2.0, s.energy_tol));
    assert!(r.duration_derivative.abs() <= 1e-6 * 2.0);
    // the reversed problem is solved by the reversed path
    let back = minimize_free_time(&y, &x, 2.0, &p, &s).unwrap();
    assert!((back.duration() - r.duration()).abs() <= 1e-4 * r.duration());
}
