use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::optim::{self, LbfgsOutcome, LbfgsSettings, Objective};
use super::{
    discretization_error_estimate, el_residual, energy_profile, path_action, raw_action, ActionValue, DiscretePath,
};
use crate::dynamics::PotentialParams;
use crate::error::{Error, Result};
use crate::rng;
use crate::space::{min_separation, raw_inner, raw_min_separation, raw_norm_sq, Configuration};

/// Discretization and solver controls shared by the fixed-time and free-time minimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeSettings {
    /// Number of segments `M` of the uniform time grid.
    pub nodes: usize,
    /// Inner solves stop when `|grad A| <= grad_tol * (1 + |A|)`.
    pub grad_tol: f64,
    /// Free-time transversality tolerance, relative to `E`: `|K - U - E| <= energy_tol * E`.
    pub energy_tol: f64,
    /// Free-time search stops when `|dA/dT| <= duration_tol * E`.
    pub duration_tol: f64,
    pub max_iterations: usize,
    pub memory: usize,
    /// Trial paths with an interior node closer than `safety_floor * min(r(x), r(y))`
    /// to a collision are rejected by the line search.
    pub safety_floor: f64,
    /// The straight initial path gets a random bump when it passes within
    /// `clearance * min(r(x), r(y))` of a collision.
    pub clearance: f64,
    /// Size of the random bump relative to `max(||y - x||, min(r(x), r(y)))`.
    pub bump_amplitude: f64,
    /// Smallest admissible total time of a free-time path.
    pub time_floor: f64,
    /// Number of initial paths tried (the first is the straight segment).
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MinimizeSettings {
    fn default() -> Self {
        Self {
            nodes: 200,
            grad_tol: 1e-8,
            energy_tol: 1e-3,
            duration_tol: 1e-7,
            max_iterations: 20_000,
            memory: 12,
            safety_floor: 1e-3,
            clearance: 0.1,
            bump_amplitude: 0.25,
            time_floor: 1e-4,
            restarts: 1,
            seed: 0,
        }
    }
}

impl MinimizeSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("energy_tol", self.energy_tol),
            ("duration_tol", self.duration_tol),
            ("safety_floor", self.safety_floor),
            ("time_floor", self.time_floor),
            ("bump_amplitude", self.bump_amplitude),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.clearance >= 0.0) {
            return Err(Error::InvalidParameter("clearance must be non-negative".into()));
        }
        if self.nodes < 2 {
            return Err(Error::InvalidParameter(format!(
                "nodes must be at least 2, got {}",
                self.nodes
            )));
        }
        if self.restarts == 0 || self.memory == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "restarts, memory and max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a minimization with its diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub path: DiscretePath,
    pub action: ActionValue,
    pub converged: bool,
    pub grad_norm: f64,
    /// `dA/dT` at the returned path; zero at a free-time optimum.
    pub duration_derivative: f64,
    /// `K - U` at each interior node.
    pub energy_profile: Vec<f64>,
    /// `max_k |K - U - E|` over the interior nodes.
    pub energy_error: f64,
    /// Smallest `r(gamma_k)` over the interior nodes.
    pub min_sep: f64,
    pub el_residual: f64,
    pub discretization_error: f64,
    pub iterations: usize,
    /// Free-time only: the optimum sits on the time floor (e.g. `x = y`).
    pub degenerate: bool,
    /// Index of the initialization that produced this result.
    pub restart: usize,
    pub free_time: bool,
}

impl MinimizeResult {
    pub fn duration(&self) -> f64 {
        self.path.duration()
    }

    pub fn value(&self) -> f64 {
        self.action.value
    }

    /// Whether the free-time transversality condition holds at tolerance `energy_tol * E`.
    pub fn transversal(&self, energy: f64, energy_tol: f64) -> bool {
        self.energy_error <= energy_tol * energy
    }
}

/// Endpoint data shared by every solve of one minimization problem.
struct Problem<'a> {
    x: &'a Configuration,
    y: &'a Configuration,
    p: &'a PotentialParams,
    energy: f64,
    settings: &'a MinimizeSettings,
    floor: f64,
    stride: usize,
}

impl<'a> Problem<'a> {
    fn new(
        x: &'a Configuration,
        y: &'a Configuration,
        energy: f64,
        p: &'a PotentialParams,
        settings: &'a MinimizeSettings,
    ) -> Result<Self> {
        settings.validate()?;
        x.check_shape(y)?;
        x.check_masses(p.masses())?;
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "energy must be positive, got {energy}"
            )));
        }
        let r = min_separation(x).min(min_separation(y));
        if !(r > 0.0) {
            return Err(Error::Precondition("endpoints must be collision-free".into()));
        }
        Ok(Self {
            x,
            y,
            p,
            energy,
            settings,
            floor: settings.safety_floor * r,
            stride: x.bodies() * x.dim(),
        })
    }

    fn segments(&self) -> usize {
        self.settings.nodes
    }

    fn lbfgs(&self) -> LbfgsSettings {
        LbfgsSettings {
            memory: self.settings.memory,
            max_iterations: self.settings.max_iterations,
            grad_tol: self.settings.grad_tol,
        }
    }

    /// Straight segment, bumped for `restart > 0` or when it grazes a collision.
    fn initial_coords(&self, restart: usize) -> Vec<f64> {
        let m = self.segments();
        let straight = DiscretePath::straight(self.x, self.y, 1.0, m)
            .expect("shapes checked")
            .coords;
        let scale_r = min_separation(self.x).min(min_separation(self.y));
        if restart == 0 && straight_clearance(self.x, self.y) >= self.settings.clearance * scale_r {
            return straight;
        }
        let (dim, masses) = (self.x.dim(), self.p.masses().as_slice());
        let chord: Vec<f64> = self
            .y
            .coords()
            .iter()
            .zip(self.x.coords())
            .map(|(b, a)| b - a)
            .collect();
        let chord_sq = raw_norm_sq(&chord, dim, masses);
        let mut amplitude = self.settings.bump_amplitude * chord_sq.sqrt().max(scale_r);
        let stream = rng::stream_seed(self.settings.seed, "action/restart");
        let mut rng = rng::from_seed(rng::sample_seed(stream, restart as u64));
        for _ in 0..40 {
            let mut bump: Vec<f64> = (0..self.stride).map(|_| rng.sample(StandardNormal)).collect();
            if chord_sq > 0.0 {
                let along = raw_inner(&bump, &chord, dim, masses) / chord_sq;
                bump.iter_mut().zip(&chord).for_each(|(b, c)| *b -= along * c);
            }
            let norm = raw_norm_sq(&bump, dim, masses).sqrt();
            if !(norm > 0.0) {
                continue;
            }
            let mut coords = straight.clone();
            for k in 1..m {
                let w = amplitude * (std::f64::consts::PI * k as f64 / m as f64).sin() / norm;
                let node = &mut coords[k * self.stride..(k + 1) * self.stride];
                node.iter_mut().zip(&bump).for_each(|(c, b)| *c += w * b);
            }
            let clear = (1..m)
                .map(|k| raw_min_separation(&coords[k * self.stride..(k + 1) * self.stride], dim))
                .fold(f64::INFINITY, f64::min);
            if clear > self.floor {
                return coords;
            }
            amplitude *= 0.5;
        }
        straight
    }

    /// Minimizes over the interior nodes at fixed `duration`, starting from `coords`.
    fn solve_fixed(&self, duration: f64, coords: &mut [f64]) -> LbfgsOutcome {
        let m = self.segments();
        let mut objective = FixedTime::new(self, duration, coords);
        let mut z = coords[self.stride..m * self.stride].to_vec();
        let outcome = optim::minimize(&mut objective, &mut z, &self.lbfgs());
        coords[self.stride..m * self.stride].copy_from_slice(&z);
        outcome
    }

    fn duration_derivative(&self, duration: f64, coords: &[f64]) -> f64 {
        match raw_action(
            coords,
            self.x.dim(),
            self.p.alpha(),
            self.p.masses().as_slice(),
            duration,
            None,
        ) {
            Ok(raw) => raw.duration_derivative(duration, self.segments(), self.energy),
            Err(_) => f64::NAN,
        }
    }

    fn coords_feasible(&self, coords: &[f64]) -> bool {
        let m = self.segments();
        (1..m).all(|k| raw_min_separation(&coords[k * self.stride..(k + 1) * self.stride], self.x.dim()) >= self.floor)
    }

    /// Resamples a user path onto this problem's grid and checks its endpoints.
    fn adopt(&self, path: &DiscretePath) -> Result<Vec<f64>> {
        if path.bodies() != self.x.bodies() || path.dim() != self.x.dim() {
            return Err(Error::shape(
                format!("{}x{} path", self.x.bodies(), self.x.dim()),
                format!("{}x{}", path.bodies(), path.dim()),
            ));
        }
        let scale = 1.0
            + self
                .x
                .coords()
                .iter()
                .chain(self.y.coords())
                .fold(0.0f64, |a, c| a.max(c.abs()));
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(p, q)| (p - q).abs() <= 1e-9 * scale);
        if !close(path.node_coords(0), self.x.coords()) || !close(path.node_coords(path.segments()), self.y.coords()) {
            return Err(Error::Precondition("initial path endpoints differ from x and y".into()));
        }
        let mut coords = if path.segments() == self.segments() {
            path.coords.clone()
        } else {
            path.resampled(self.segments())?.coords
        };
        let m = self.segments();
        coords[..self.stride].copy_from_slice(self.x.coords());
        coords[m * self.stride..].copy_from_slice(self.y.coords());
        Ok(coords)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        duration: f64,
        coords: Vec<f64>,
        outcome: LbfgsOutcome,
        iterations: usize,
        restart: usize,
        free_time: bool,
        degenerate: bool,
        time_converged: bool,
    ) -> Result<MinimizeResult> {
        let path = DiscretePath::from_raw(self.x.bodies(), self.x.dim(), duration, coords);
        let action = path_action(&path, self.energy, self.p)?;
        let profile = energy_profile(&path, self.p)?;
        let energy_error = profile.iter().map(|h| (h - self.energy).abs()).fold(0.0, f64::max);
        let duration_derivative = self.duration_derivative(duration, &path.coords);
        Ok(MinimizeResult {
            min_sep: path.interior_min_separation(),
            el_residual: el_residual(&path, self.p)?,
            discretization_error: discretization_error_estimate(&path, self.p.masses()),
            converged: outcome.converged && time_converged,
            grad_norm: outcome.grad_norm,
            duration_derivative,
            energy_profile: profile,
            energy_error,
            iterations,
            degenerate,
            restart,
            free_time,
            action,
            path,
        })
    }
}

/// Smallest inter-body distance along the straight segment from `x` to `y`.
fn straight_clearance(x: &Configuration, y: &Configuration) -> f64 {
    let dim = x.dim();
    let mut best = f64::INFINITY;
    let mut d0 = vec![0.0; dim];
    let mut e = vec![0.0; dim];
    for i in 0..x.bodies() {
        for j in i + 1..x.bodies() {
            for c in 0..dim {
                d0[c] = x.point(j)[c] - x.point(i)[c];
                e[c] = (y.point(j)[c] - y.point(i)[c]) - d0[c];
            }
            let ee: f64 = e.iter().map(|v| v * v).sum();
            let s = if ee > 0.0 {
                (-d0.iter().zip(&e).map(|(a, b)| a * b).sum::<f64>() / ee).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let dist = d0.iter().zip(&e).map(|(a, b)| (a + s * b).powi(2)).sum::<f64>().sqrt();
            best = best.min(dist);
        }
    }
    best
}

/// The discrete action at fixed duration as a function of the interior nodes.
///
/// Preconditioned by the kinetic Hessian, `m_i / dt * tridiag(-1, 2, -1)` per coordinate.
struct FixedTime<'a, 'b> {
    problem: &'b Problem<'a>,
    full: Vec<f64>,
    duration: f64,
    inv_pivots: Vec<f64>,
}

impl<'a, 'b> FixedTime<'a, 'b> {
    fn new(problem: &'b Problem<'a>, duration: f64, coords: &[f64]) -> Self {
        let n = problem.segments() - 1;
        let mut inv_pivots = Vec::with_capacity(n);
        let mut pivot = 2.0;
        for _ in 0..n {
            inv_pivots.push(1.0 / pivot);
            pivot = 2.0 - 1.0 / pivot;
        }
        Self {
            problem,
            full: coords.to_vec(),
            duration,
            inv_pivots,
        }
    }
}

impl Objective for FixedTime<'_, '_> {
    fn value_grad(&mut self, z: &[f64], grad: &mut [f64]) -> Option<f64> {
        let pr = self.problem;
        let (stride, m, dim) = (pr.stride, pr.segments(), pr.x.dim());
        self.full[stride..m * stride].copy_from_slice(z);
        if z.chunks_exact(stride)
            .any(|node| raw_min_separation(node, dim) < pr.floor)
        {
            return None;
        }
        let raw = raw_action(
            &self.full,
            dim,
            pr.p.alpha(),
            pr.p.masses().as_slice(),
            self.duration,
            Some(grad),
        )
        .ok()?;
        let value = raw.parts(self.duration, m, pr.energy).value;
        value.is_finite().then_some(value)
    }

    fn precondition(&self, g: &[f64], out: &mut [f64]) {
        let pr = self.problem;
        let (stride, dim) = (pr.stride, pr.x.dim());
        let n = self.inv_pivots.len();
        let dt = self.duration / pr.segments() as f64;
        let masses = pr.p.masses().as_slice();
        for col in 0..stride {
            let scale = dt / masses[col / dim];
            // Forward sweep.
            let mut prev = 0.0;
            for k in 0..n {
                prev = (g[k * stride + col] + prev) * self.inv_pivots[k];
                out[k * stride + col] = prev;
            }
            // Back substitution.
            let mut next = out[(n - 1) * stride + col];
            out[(n - 1) * stride + col] = next * scale;
            for k in (0..n - 1).rev() {
                next = out[k * stride + col] + self.inv_pivots[k] * next;
                out[k * stride + col] = next * scale;
            }
        }
    }
}

/// Local minimizer of the discrete action over paths of total time `duration` from `x` to `y`.
///
/// Without `init`, `settings.restarts` initial paths are tried (the straight segment first,
/// then randomly bumped ones) and the best converged result is returned.
pub fn minimize_fixed_time(
    x: &Configuration,
    y: &Configuration,
    duration: f64,
    init: Option<&DiscretePath>,
    energy: f64,
    p: &PotentialParams,
    settings: &MinimizeSettings,
) -> Result<MinimizeResult> {
    let problem = Problem::new(x, y, energy, p, settings)?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let starts: Vec<(usize, Vec<f64>)> = match init {
        Some(path) => {
            let coords = problem.adopt(path)?;
            if !problem.coords_feasible(&coords) {
                return Err(Error::Precondition(
                    "initial path comes too close to a collision".into(),
                ));
            }
            vec![(0, coords)]
        }
        None => (0..settings.restarts).map(|r| (r, problem.initial_coords(r))).collect(),
    };
    let mut best: Option<MinimizeResult> = None;
    for (restart, mut coords) in starts {
        let outcome = problem.solve_fixed(duration, &mut coords);
        let result = problem.finish(
            duration,
            coords,
            outcome,
            outcome.iterations,
            restart,
            false,
            false,
            true,
        )?;
        best = Some(pick_better(best, result));
    }
    Ok(best.expect("at least one start"))
}

fn pick_better(best: Option<MinimizeResult>, candidate: MinimizeResult) -> MinimizeResult {
    match best {
        None => candidate,
        Some(b) => {
            let better = match (candidate.converged, b.converged) {
                (true, false) => true,
                (false, true) => false,
                _ => candidate.value() < b.value(),
            };
            if better {
                candidate
            } else {
                b
            }
        }
    }
}

/// Joint minimization over paths and total time: the numerical free-time minimizer.
pub fn minimize_free_time(
    x: &Configuration,
    y: &Configuration,
    energy: f64,
    p: &PotentialParams,
    settings: &MinimizeSettings,
) -> Result<MinimizeResult> {
    minimize_free_time_with(x, y, energy, p, settings, &[])
}

/// [`minimize_free_time`] with additional initial paths (tried after the built-in restarts,
/// each starting the time search at its own duration).
pub fn minimize_free_time_with(
    x: &Configuration,
    y: &Configuration,
    energy: f64,
    p: &PotentialParams,
    settings: &MinimizeSettings,
    seeds: &[DiscretePath],
) -> Result<MinimizeResult> {
    let problem = Problem::new(x, y, energy, p, settings)?;
    let chord = crate::space::weighted_norm(&(y - x), p.masses())?;
    let scale = 1.0 + crate::space::weighted_norm(x, p.masses())? + crate::space::weighted_norm(y, p.masses())?;
    if chord <= 1e-14 * scale {
        return degenerate_endpoints(&problem);
    }
    let guess = (chord / energy.sqrt()).max(settings.time_floor);
    let mut starts: Vec<(usize, f64, Vec<f64>)> = (0..settings.restarts)
        .map(|r| (r, guess, problem.initial_coords(r)))
        .collect();
    for (i, seed) in seeds.iter().enumerate() {
        let coords = problem.adopt(seed)?;
        if problem.coords_feasible(&coords) {
            starts.push((settings.restarts + i, seed.duration().max(settings.time_floor), coords));
        }
    }
    let mut best: Option<MinimizeResult> = None;
    for (restart, t0, coords) in starts {
        let result = free_time_search(&problem, t0, coords, restart)?;
        best = Some(pick_better(best, result));
    }
    Ok(best.expect("at least one start"))
}

/// Free-time minimization from a single initial path, without the built-in restarts.
/// The time search starts at the duration of `init`.
pub fn minimize_free_time_from(
    x: &Configuration,
    y: &Configuration,
    energy: f64,
    p: &PotentialParams,
    settings: &MinimizeSettings,
    init: &DiscretePath,
) -> Result<MinimizeResult> {
    let problem = Problem::new(x, y, energy, p, settings)?;
    let coords = problem.adopt(init)?;
    if !problem.coords_feasible(&coords) {
        return Err(Error::Precondition(
            "initial path comes too close to a collision".into(),
        ));
    }
    free_time_search(&problem, init.duration().max(settings.time_floor), coords, 0)
}

/// `x = y`: the infimum `T (U(x) + E)` is approached as `T -> 0`; solve on the time floor.
fn degenerate_endpoints(problem: &Problem<'_>) -> Result<MinimizeResult> {
    let t = problem.settings.time_floor;
    let mut coords = DiscretePath::straight(problem.x, problem.y, t, problem.segments())?.coords;
    let outcome = problem.solve_fixed(t, &mut coords);
    problem.finish(t, coords, outcome, outcome.iterations, 0, true, true, true)
}

struct TimeEval {
    t: f64,
    value: f64,
    slope: f64,
    coords: Vec<f64>,
    outcome: LbfgsOutcome,
}

struct TimeSearch<'p, 'a> {
    problem: &'p Problem<'a>,
    evals: Vec<TimeEval>,
    iterations: usize,
}

impl TimeSearch<'_, '_> {
    /// Inner solve at `t`, warm-started from the evaluation with the closest duration.
    fn eval(&mut self, t: f64) -> usize {
        let coords = self
            .evals
            .iter()
            .min_by(|a, b| (a.t / t).ln().abs().total_cmp(&(b.t / t).ln().abs()))
            .map(|e| e.coords.clone())
            .expect("seeded with an initial evaluation");
        self.eval_from(t, coords)
    }

    fn value_at(&mut self, t: f64) -> f64 {
        let i = self.eval(t);
        self.evals[i].value
    }

    fn eval_from(&mut self, t: f64, mut coords: Vec<f64>) -> usize {
        let outcome = self.problem.solve_fixed(t, &mut coords);
        self.iterations += outcome.iterations;
        let slope = self.problem.duration_derivative(t, &coords);
        self.evals.push(TimeEval {
            t,
            value: outcome.value,
            slope,
            coords,
            outcome,
        });
        self.evals.len() - 1
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn free_time_search(problem: &Problem<'_>, t0: f64, coords: Vec<f64>, restart: usize) -> Result<MinimizeResult> {
    let settings = problem.settings;
    let floor = settings.time_floor;
    let slope_tol = settings.duration_tol * problem.energy;
    let mut search = TimeSearch {
        problem,
        evals: Vec::new(),
        iterations: 0,
    };
    let first = search.eval_from(t0, coords);

    // Bracket the sign change of dA/dT.
    let (mut lo, mut hi);
    if search.evals[first].slope < 0.0 {
        lo = first;
        loop {
            let t = 2.0 * search.evals[lo].t;
            let i = search.eval(t);
            if search.evals[i].slope >= 0.0 {
                hi = i;
                break;
            }
            lo = i;
            if search.evals.len() > 80 {
                return search_failed(search, lo, restart);
            }
        }
    } else {
        hi = first;
        loop {
            let t = (0.5 * search.evals[hi].t).max(floor);
            if t >= search.evals[hi].t {
                // The optimum lies on the time floor.
                let eval = search.evals.swap_remove(hi);
                return problem.finish(
                    eval.t,
                    eval.coords,
                    eval.outcome,
                    search.iterations,
                    restart,
                    true,
                    true,
                    true,
                );
            }
            let i = search.eval(t);
            if search.evals[i].slope < 0.0 {
                lo = i;
                break;
            }
            hi = i;
            if search.evals.len() > 80 {
                return search_failed(search, hi, restart);
            }
        }
    }

    // Golden-section reduction of the bracket on the action values.
    let (mut a, mut b) = (search.evals[lo].t, search.evals[hi].t);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = search.value_at(c);
    let mut fd = search.value_at(d);
    while b - a > 1e-2 * 0.5 * (a + b) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = search.value_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = search.value_at(d);
        }
    }

    // Tightest sign bracket among the evaluations so far.
    for (i, e) in search.evals.iter().enumerate() {
        if e.slope < 0.0 && e.t > search.evals[lo].t && e.t < search.evals[hi].t {
            lo = i;
        }
    }
    for (i, e) in search.evals.iter().enumerate() {
        if e.slope >= 0.0 && e.t < search.evals[hi].t && e.t > search.evals[lo].t {
            hi = i;
        }
    }

    // Illinois regula falsi on dA/dT, the derivative of the minimized action.
    let mut best = if search.evals[lo].slope.abs() < search.evals[hi].slope.abs() {
        lo
    } else {
        hi
    };
    let (mut g_lo, mut g_hi) = (search.evals[lo].slope, search.evals[hi].slope);
    let mut side = 0i8;
    for _ in 0..60 {
        if search.evals[best].slope.abs() <= slope_tol {
            break;
        }
        let (t_lo, t_hi) = (search.evals[lo].t, search.evals[hi].t);
        if t_hi - t_lo <= 1e-13 * t_hi {
            break;
        }
        let mut t = (t_lo * g_hi - t_hi * g_lo) / (g_hi - g_lo);
        if !(t > t_lo && t < t_hi) {
            t = 0.5 * (t_lo + t_hi);
        }
        let i = search.eval(t);
        let g = search.evals[i].slope;
        if g.abs() < search.evals[best].slope.abs() {
            best = i;
        }
        if g < 0.0 {
            lo = i;
            g_lo = g;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = i;
            g_hi = g;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }

    let time_converged = search.evals[best].slope.abs() <= slope_tol;
    let iterations = search.iterations;
    let eval = search.evals.swap_remove(best);
    problem.finish(
        eval.t,
        eval.coords,
        eval.outcome,
        iterations,
        restart,
        true,
        false,
        time_converged,
    )
}

fn search_failed(mut search: TimeSearch<'_, '_>, index: usize, restart: usize) -> Result<MinimizeResult> {
    let iterations = search.iterations;
    let problem = search.problem;
    let eval = search.evals.swap_remove(index);
    problem.finish(
        eval.t,
        eval.coords,
        eval.outcome,
        iterations,
        restart,
        true,
        false,
        false,
    )
}
