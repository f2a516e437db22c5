//! Randomized checks of the explicit-constant inequalities for configurations near a ray
//! `x + t a` and near a limit shape `a`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::space::{
    max_separation, min_separation, normalize_to_sphere, weighted_inner, weighted_norm, Configuration, MassVector,
    UnitShape,
};

/// Relative rounding allowance when an inequality is tight.
pub const ROUNDING: f64 = 1e-12;

/// Hypothesis constant `c` in `t > c (1 + ||x||) / r(a)`.
pub const RAY_CONSTANT: f64 = 70.0;

/// Shapes with `r(a)` below this are rejected by the samplers.
pub const MIN_SHAPE_SEPARATION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBoundMargins {
    /// `sqrt(2) ||x|| - max_i |x_i|`.
    pub body: f64,
    /// `2 sqrt(2) ||x|| - R(x)`.
    pub diameter: f64,
    /// `3 ||x|| - r(x)`.
    pub separation: f64,
    pub norm: f64,
}

impl NormBoundMargins {
    /// Smallest margin relative to `||x||`.
    pub fn worst(&self) -> f64 {
        let m = self.body.min(self.diameter).min(self.separation);
        if self.norm > 0.0 {
            m / self.norm
        } else {
            m
        }
    }

    pub fn holds(&self) -> bool {
        self.worst() >= -ROUNDING
    }
}

/// `|x_i| <= sqrt(2) ||x||` for every body and `R(x) <= 2 sqrt(2) ||x||` (so `r(x) < 3 ||x||`).
pub fn check_norm_bounds(x: &Configuration, m: &MassVector) -> Result<NormBoundMargins> {
    let norm = weighted_norm(x, m)?;
    let largest = (0..x.bodies())
        .map(|i| x.point(i).iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok(NormBoundMargins {
        body: std::f64::consts::SQRT_2 * norm - largest,
        diameter: 2.0 * std::f64::consts::SQRT_2 * norm - max_separation(x),
        separation: 3.0 * norm - min_separation(x),
        norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayMargins {
    /// `r(x + t a) - (67/70) r(a) t`.
    pub separation: f64,
    /// `r(a) / 30 - || (x + t a) / ||x + t a|| - a ||`.
    pub direction: f64,
    /// `r(a) t`, the scale of `separation`.
    pub scale: f64,
    pub shape_separation: f64,
}

impl RayMargins {
    /// Smallest margin relative to its right-hand side.
    pub fn worst(&self) -> f64 {
        (self.separation / self.scale).min(30.0 * self.direction / self.shape_separation)
    }

    pub fn holds(&self) -> bool {
        self.worst() >= -ROUNDING
    }
}

fn ray_margins(x: &Configuration, a: &UnitShape, t: f64, m: &MassVector) -> Result<RayMargins> {
    let ra = min_separation(a);
    let moved = x.axpy(t, a);
    let unit = normalize_to_sphere(&moved, m)?;
    let drift = weighted_norm(&(unit.config() - a.config()), m)?;
    Ok(RayMargins {
        separation: min_separation(&moved) - 67.0 / 70.0 * ra * t,
        direction: ra / 30.0 - drift,
        scale: ra * t,
        shape_separation: ra,
    })
}

/// Separation and direction estimates along the ray `x + t a`, for `t > 70 (1 + ||x||) / r(a)`.
pub fn check_ray_estimates(x: &Configuration, a: &UnitShape, t: f64, m: &MassVector) -> Result<RayMargins> {
    x.check_shape(a)?;
    let ra = min_separation(a);
    if !(ra > 0.0) {
        return Err(Error::Precondition("shape must be collision-free".into()));
    }
    let threshold = RAY_CONSTANT * (1.0 + weighted_norm(x, m)?) / ra;
    if !(t > threshold) {
        return Err(Error::Precondition(format!("need t > {threshold}, got {t}")));
    }
    ray_margins(x, a, t, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationMargins {
    /// `r(x') - (r(a) - 3 ||x' - a||)`.
    pub separation: f64,
    /// `r(x') - (1 - 3 lambda) r(a)`.
    pub separation_lambda: f64,
    /// `r(x') - (r(a) - 2 ||x' - a||)`; measured, not asserted.
    pub separation_two: f64,
    /// `min_{i<j} cos angle(x'_i - x'_j, a_i - a_j) - (1 - 6 lambda)`.
    pub angle: f64,
    /// `<a, x'> - (1 - 9 lambda^2 / 2)`, only when `||x'|| = 1`.
    pub inner: Option<f64>,
    pub shape_separation: f64,
}

impl PerturbationMargins {
    /// Smallest asserted margin (separations relative to `r(a)`).
    pub fn worst(&self) -> f64 {
        let sep = self.separation.min(self.separation_lambda) / self.shape_separation;
        sep.min(self.angle).min(self.inner.unwrap_or(f64::INFINITY))
    }

    pub fn holds(&self) -> bool {
        self.worst() >= -ROUNDING
    }
}

/// Estimates for `x'` with `||x' - a|| <= lambda r(a)`, `lambda` in `(0, 1/2)`.
pub fn check_perturbation_estimates(
    a: &UnitShape,
    xp: &Configuration,
    lambda: f64,
    m: &MassVector,
) -> Result<PerturbationMargins> {
    a.check_shape(xp)?;
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(Error::Precondition(format!(
            "lambda must lie in (0, 1/2), got {lambda}"
        )));
    }
    let ra = min_separation(a);
    let dist = weighted_norm(&(xp - a.config()), m)?;
    if !(dist <= lambda * ra) {
        return Err(Error::Precondition(format!(
            "need ||x' - a|| <= lambda r(a) = {}, got {dist}",
            lambda * ra
        )));
    }
    let rxp = min_separation(xp);
    let mut worst_cos = f64::INFINITY;
    for i in 0..a.bodies() {
        for j in i + 1..a.bodies() {
            let u: Vec<f64> = xp.point(i).iter().zip(xp.point(j)).map(|(p, q)| p - q).collect();
            let v: Vec<f64> = a.point(i).iter().zip(a.point(j)).map(|(p, q)| p - q).collect();
            let nu = u.iter().map(|c| c * c).sum::<f64>().sqrt();
            let nv = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if nu == 0.0 {
                return Err(Error::Collision { i, j });
            }
            let cos = u.iter().zip(&v).map(|(p, q)| p * q).sum::<f64>() / (nu * nv);
            worst_cos = worst_cos.min(cos);
        }
    }
    let unit = (weighted_norm(xp, m)? - 1.0).abs() <= UnitShape::NORM_TOLERANCE;
    let inner = if unit {
        Some(weighted_inner(a, xp, m)? - (1.0 - 4.5 * lambda * lambda))
    } else {
        None
    };
    Ok(PerturbationMargins {
        separation: rxp - (ra - 3.0 * dist),
        separation_lambda: rxp - (1.0 - 3.0 * lambda) * ra,
        separation_two: rxp - (ra - 2.0 * dist),
        angle: worst_cos - (1.0 - 6.0 * lambda),
        inner,
        shape_separation: ra,
    })
}

/// Masses log-uniform in `[1, 10]`, renormalized to minimum 1.
pub fn sample_masses(rng: &mut StreamRng, bodies: usize) -> MassVector {
    let ln10 = std::f64::consts::LN_10;
    MassVector::new((0..bodies).map(|_| (rng.random::<f64>() * ln10).exp()).collect()).expect("positive masses")
}

fn gaussian(rng: &mut StreamRng, bodies: usize, dim: usize, scale: f64) -> Configuration {
    let coords = (0..bodies * dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Configuration::new(bodies, dim, coords).expect("valid shape")
}

/// Gaussian configuration projected to the unit sphere, redrawn while `r(a) < 0.05`.
/// Returns the shape and the number of rejected draws.
pub fn sample_shape(rng: &mut StreamRng, bodies: usize, dim: usize, m: &MassVector) -> (UnitShape, usize) {
    let mut rejected = 0;
    loop {
        let g = gaussian(rng, bodies, dim, 1.0);
        if let Ok(a) = normalize_to_sphere(&g, m) {
            if min_separation(&a) >= MIN_SHAPE_SEPARATION {
                return (a, rejected);
            }
        }
        rejected += 1;
    }
}

fn log_uniform(rng: &mut StreamRng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma,
    Ray,
    Perturbation,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Lemma, Suite::Ray, Suite::Perturbation];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma => "lemma",
            Suite::Ray => "ray",
            Suite::Perturbation => "perturbation",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemma" => Ok(Suite::Lemma),
            "ray" => Ok(Suite::Ray),
            "perturbation" => Ok(Suite::Perturbation),
            _ => Err(Error::InvalidParameter(format!("unknown suite `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSample {
    pub masses: MassVector,
    pub x: Configuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    pub masses: MassVector,
    pub x: Configuration,
    pub a: UnitShape,
    /// `t` divided by `70 (1 + ||x||) / r(a)`; always above 1.
    pub multiplier: f64,
    pub t: f64,
    /// A time above the weaker threshold `(1 + ||x||) / r(a)` only.
    pub t_statement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSample {
    pub masses: MassVector,
    pub a: UnitShape,
    pub xp: Configuration,
    pub lambda: f64,
}

/// Values of `lambda` exercised by the perturbation suite.
pub const LAMBDA_GRID: [f64; 9] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45];

pub fn lemma_sample(seed: u64, bodies: usize, dim: usize) -> LemmaSample {
    let mut r = rng::from_seed(seed);
    let masses = sample_masses(&mut r, bodies);
    let scale = log_uniform(&mut r, 1e-3, 1e3);
    let x = gaussian(&mut r, bodies, dim, scale);
    LemmaSample { masses, x }
}

/// Ray sample with `t` strictly above the hypothesis threshold; one in ten sits at
/// `(1 + 1e-6)` times the threshold.
pub fn ray_sample(seed: u64, bodies: usize, dim: usize) -> (RaySample, usize) {
    let mut r = rng::from_seed(seed);
    let masses = sample_masses(&mut r, bodies);
    let (a, rejected) = sample_shape(&mut r, bodies, dim, &masses);
    let scale = log_uniform(&mut r, 1e-2, 1e2);
    let x = gaussian(&mut r, bodies, dim, scale);
    let multiplier = if r.random::<f64>() < 0.1 {
        1.0 + 1e-6
    } else {
        (1.0 + 1e-6) * log_uniform(&mut r, 1.0, 100.0)
    };
    let base = (1.0 + weighted_norm(&x, &masses).expect("matching masses")) / min_separation(&a);
    let t_statement = (1.0 + 1e-6) * base * log_uniform(&mut r, 1.0, RAY_CONSTANT);
    let sample = RaySample {
        t: multiplier * RAY_CONSTANT * base,
        masses,
        x,
        a,
        multiplier,
        t_statement,
    };
    (sample, rejected)
}

/// Perturbation sample satisfying `||x' - a|| <= lambda r(a)`; half of the samples lie
/// on the unit sphere. Returns the sample and the number of rejected draws.
pub fn perturbation_sample(seed: u64, bodies: usize, dim: usize) -> (PerturbationSample, usize) {
    let mut r = rng::from_seed(seed);
    let masses = sample_masses(&mut r, bodies);
    let (a, mut rejected) = sample_shape(&mut r, bodies, dim, &masses);
    let lambda = LAMBDA_GRID[r.random_range(0..LAMBDA_GRID.len())];
    let on_sphere = r.random::<bool>();
    let ra = min_separation(&a);
    loop {
        let dir = gaussian(&mut r, bodies, dim, 1.0);
        let dn = weighted_norm(&dir, &masses).expect("matching masses");
        let rho: f64 = r.random();
        let mut xp = a.axpy(rho * lambda * ra / dn, &dir);
        if on_sphere {
            xp = normalize_to_sphere(&xp, &masses).expect("nonzero").into_config();
        }
        let dist = weighted_norm(&(&xp - a.config()), &masses).expect("matching masses");
        if dist <= lambda * ra && min_separation(&xp) > 0.0 {
            return (PerturbationSample { masses, a, xp, lambda }, rejected);
        }
        rejected += 1;
    }
}

/// Outcome of one suite on one `(N, n)` family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViolationReport {
    pub suite: Suite,
    pub bodies: usize,
    pub dim: usize,
    pub seed: u64,
    pub checked: usize,
    pub violations: usize,
    /// Smallest relative margin over all samples.
    pub worst_margin: f64,
    pub worst_seed: u64,
    /// Seeds of violating samples (at most [`MAX_REPLAY_SEEDS`]).
    pub replay_seeds: Vec<u64>,
    /// Draws discarded by the samplers because a hypothesis failed.
    pub rejected_draws: usize,
    /// Failures of the weaker statement-level variants (ray: hypothesis constant 1;
    /// perturbation: separation drop constant 2). Measured only.
    pub statement_violations: Option<usize>,
    /// Spearman correlation between the ray margin (on the scale of the hypothesis
    /// threshold) and the `t` multiplier.
    pub rank_correlation: Option<f64>,
}

pub const MAX_REPLAY_SEEDS: usize = 32;

struct Outcome {
    seed: u64,
    margin: f64,
    holds: bool,
    rejected: usize,
    statement_fails: bool,
    covariate: f64,
    trend: f64,
}

fn lemma_outcome(seed: u64, bodies: usize, dim: usize) -> Result<Outcome> {
    let s = lemma_sample(seed, bodies, dim);
    let margins = check_norm_bounds(&s.x, &s.masses)?;
    Ok(Outcome {
        seed,
        margin: margins.worst(),
        holds: margins.holds(),
        rejected: 0,
        statement_fails: false,
        covariate: 0.0,
        trend: 0.0,
    })
}

fn ray_outcome(seed: u64, bodies: usize, dim: usize) -> Result<Outcome> {
    let (s, rejected) = ray_sample(seed, bodies, dim);
    let margins = check_ray_estimates(&s.x, &s.a, s.t, &s.masses)?;
    let statement = ray_margins(&s.x, &s.a, s.t_statement, &s.masses)?;
    // Margins measured on the scale of the hypothesis threshold, where they grow with `t`.
    let threshold_scale = margins.scale / s.multiplier;
    let trend = (margins.separation / threshold_scale).min(30.0 * margins.direction / margins.shape_separation);
    Ok(Outcome {
        seed,
        margin: margins.worst(),
        holds: margins.holds(),
        rejected,
        statement_fails: !statement.holds(),
        covariate: s.multiplier,
        trend,
    })
}

fn perturbation_outcome(seed: u64, bodies: usize, dim: usize) -> Result<Outcome> {
    let (s, rejected) = perturbation_sample(seed, bodies, dim);
    let margins = check_perturbation_estimates(&s.a, &s.xp, s.lambda, &s.masses)?;
    Ok(Outcome {
        seed,
        margin: margins.worst(),
        holds: margins.holds(),
        rejected,
        statement_fails: margins.separation_two < -ROUNDING * margins.shape_separation,
        covariate: s.lambda,
        trend: 0.0,
    })
}

/// Per-sample seed of sample `index` of a suite.
pub fn suite_sample_seed(suite: Suite, bodies: usize, dim: usize, seed: u64, index: usize) -> u64 {
    let stream = rng::stream_seed(seed, &format!("geometry/{}/N{bodies}/n{dim}", suite.name()));
    rng::sample_seed(stream, index as u64)
}

/// Runs `samples` seeded checks of `suite` on `N = bodies`, `n = dim`.
pub fn run_suite(suite: Suite, bodies: usize, dim: usize, samples: usize, seed: u64) -> Result<ViolationReport> {
    if bodies < 2 || dim < 2 {
        return Err(Error::InvalidParameter("suites need N >= 2 and n >= 2".into()));
    }
    let outcomes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = suite_sample_seed(suite, bodies, dim, seed, i);
            match suite {
                Suite::Lemma => lemma_outcome(s, bodies, dim),
                Suite::Ray => ray_outcome(s, bodies, dim),
                Suite::Perturbation => perturbation_outcome(s, bodies, dim),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = ViolationReport {
        suite,
        bodies,
        dim,
        seed,
        checked: outcomes.len(),
        violations: 0,
        worst_margin: f64::INFINITY,
        worst_seed: 0,
        replay_seeds: Vec::new(),
        rejected_draws: outcomes.iter().map(|o| o.rejected).sum(),
        statement_violations: None,
        rank_correlation: None,
    };
    for o in &outcomes {
        if o.margin < report.worst_margin {
            report.worst_margin = o.margin;
            report.worst_seed = o.seed;
        }
        if !o.holds {
            report.violations += 1;
            if report.replay_seeds.len() < MAX_REPLAY_SEEDS {
                report.replay_seeds.push(o.seed);
            }
        }
    }
    if suite != Suite::Lemma {
        report.statement_violations = Some(outcomes.iter().filter(|o| o.statement_fails).count());
    }
    if suite == Suite::Ray {
        let margins: Vec<f64> = outcomes.iter().map(|o| o.trend).collect();
        let covariates: Vec<f64> = outcomes.iter().map(|o| o.covariate).collect();
        report.rank_correlation = Some(spearman(&margins, &covariates));
    }
    Ok(report)
}

/// Ranks starting at 1, ties sharing their mean rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; `NaN` when either input is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    cov / (va * vb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(points: &[[f64; 2]]) -> Configuration {
        Configuration::from_points(points).unwrap()
    }

    #[test]
    fn norm_bounds_on_antipodal_pair() {
        let m = MassVector::equal(2).unwrap();
        let x = cfg(&[[1.0, 0.0], [-1.0, 0.0]]);
        let b = check_norm_bounds(&x, &m).unwrap();
        assert!((b.norm - 1.0).abs() < 1e-15);
        assert!((b.body - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((b.diameter - (2.0 * 2f64.sqrt() - 2.0)).abs() < 1e-15);
        assert!(b.holds());
    }

    #[test]
    fn single_light_body_is_the_equality_case() {
        let m = MassVector::new(vec![1.0, 4.0, 2.0]).unwrap();
        let x = Configuration::from_points(&[[3.0, 4.0], [0.0, 0.0], [0.0, 0.0]]).unwrap();
        let b = check_norm_bounds(&x, &m).unwrap();
        assert!(b.body.abs() < 1e-14);
        assert!(b.holds());
    }

    #[test]
    fn ray_from_origin_points_exactly_along_a() {
        let m = MassVector::equal(2).unwrap();
        let a = normalize_to_sphere(&cfg(&[[1.0, 0.0], [-1.0, 0.0]]), &m).unwrap();
        let x = Configuration::zeros(2, 2);
        let t = 1.01 * RAY_CONSTANT / min_separation(&a);
        let r = check_ray_estimates(&x, &a, t, &m).unwrap();
        assert!((r.direction - min_separation(&a) / 30.0).abs() < 1e-15);
        assert!(r.holds());
        assert!(check_ray_estimates(&x, &a, 0.5 * t, &m).is_err());
    }

    #[test]
    fn perturbation_at_the_shape_itself() {
        let m = MassVector::equal(3).unwrap();
        let a = normalize_to_sphere(&cfg(&[[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]]), &m).unwrap();
        let r = check_perturbation_estimates(&a, a.config(), 0.1, &m).unwrap();
        assert!(r.separation.abs() < 1e-15);
        assert!((r.angle - 0.6).abs() < 1e-12);
        assert!((r.inner.unwrap() - 0.045).abs() < 1e-12);
        assert!(r.holds());
        assert!(check_perturbation_estimates(&a, a.config(), 0.5, &m).is_err());
        let far = a.scaled(2.0);
        assert!(check_perturbation_estimates(&a, &far, 0.1, &m).is_err());
    }

    #[test]
    fn samplers_respect_hypotheses() {
        for i in 0..200 {
            let (s, _) = ray_sample(i, 3, 2);
            let thr = RAY_CONSTANT * (1.0 + weighted_norm(&s.x, &s.masses).unwrap()) / min_separation(&s.a);
            assert!(s.t > thr);
            assert!(min_separation(&s.a) >= MIN_SHAPE_SEPARATION);
            let (q, _) = perturbation_sample(i, 3, 3);
            let d = weighted_norm(&(&q.xp - q.a.config()), &q.masses).unwrap();
            assert!(d <= q.lambda * min_separation(&q.a));
            let masses = lemma_sample(i, 5, 2).masses;
            assert_eq!(masses.as_slice().iter().cloned().fold(f64::INFINITY, f64::min), 1.0);
            assert!(masses.as_slice().iter().all(|&v| v <= 10.0 + 1e-12));
        }
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 25.0, 100.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn small_suites_are_clean_and_reproducible() {
        for suite in Suite::ALL {
            let a = run_suite(suite, 3, 2, 500, 7).unwrap();
            let b = run_suite(suite, 3, 2, 500, 7).unwrap();
            assert_eq!(a.violations, 0, "{a:?}");
            assert_eq!(a.worst_margin.to_bits(), b.worst_margin.to_bits());
            assert_eq!(a.worst_seed, b.worst_seed);
        }
    }
}
