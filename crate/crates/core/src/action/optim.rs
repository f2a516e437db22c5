//! Preconditioned limited-memory BFGS with a backtracking line search that rejects
//! infeasible trial points.

use std::collections::VecDeque;

pub(crate) trait Objective {
    /// Value and gradient at `z`, or `None` if `z` is infeasible (e.g. too close to a collision).
    fn value_grad(&mut self, z: &[f64], grad: &mut [f64]) -> Option<f64>;

    /// Applies an approximation of the inverse Hessian to `g`.
    fn precondition(&self, g: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LbfgsSettings {
    pub memory: usize,
    pub max_iterations: usize,
    /// Converged when `|grad| <= grad_tol * (1 + |f|)`.
    pub grad_tol: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LbfgsOutcome {
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `obj` starting from `z`, which must be feasible; `z` holds the final iterate.
pub(crate) fn minimize<O: Objective>(obj: &mut O, z: &mut [f64], settings: &LbfgsSettings) -> LbfgsOutcome {
    let n = z.len();
    let mut g = vec![0.0; n];
    let Some(mut f) = obj.value_grad(z, &mut g) else {
        return LbfgsOutcome {
            value: f64::NAN,
            grad_norm: f64::NAN,
            iterations: 0,
            converged: false,
        };
    };
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(settings.memory);
    let mut gamma = 1.0;
    let mut d = vec![0.0; n];
    let mut alphas = vec![0.0; settings.memory];
    let mut q = vec![0.0; n];
    let mut z_trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut gnorm = norm(&g);
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        if gnorm <= settings.grad_tol * (1.0 + f.abs()) {
            return LbfgsOutcome {
                value: f,
                grad_norm: gnorm,
                iterations,
                converged: true,
            };
        }
        iterations += 1;

        // Two-loop recursion.
        q.copy_from_slice(&g);
        for (idx, pair) in history.iter().enumerate().rev() {
            let a = pair.rho * dot(&pair.s, &q);
            alphas[idx] = a;
            q.iter_mut().zip(&pair.y).for_each(|(qi, yi)| *qi -= a * yi);
        }
        obj.precondition(&q, &mut d);
        d.iter_mut().for_each(|di| *di *= gamma);
        for (idx, pair) in history.iter().enumerate() {
            let b = pair.rho * dot(&pair.y, &d);
            let coef = alphas[idx] - b;
            d.iter_mut().zip(&pair.s).for_each(|(di, si)| *di += coef * si);
        }
        d.iter_mut().for_each(|di| *di = -*di);

        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            gamma = 1.0;
            obj.precondition(&g, &mut d);
            d.iter_mut().for_each(|di| *di = -*di);
            slope = dot(&g, &d);
            if !(slope < 0.0) {
                break;
            }
        }

        match line_search(obj, z, f, gnorm, &d, slope, &mut z_trial, &mut g_trial) {
            Some(f_new) => {
                let s: Vec<f64> = z_trial.iter().zip(z.iter()).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g_trial.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
                    let mut hy = vec![0.0; n];
                    obj.precondition(&y, &mut hy);
                    let yhy = dot(&y, &hy);
                    if yhy > 0.0 {
                        gamma = sy / yhy;
                    }
                    if history.len() == settings.memory {
                        history.pop_front();
                    }
                    history.push_back(Pair { s, y, rho: 1.0 / sy });
                }
                z.copy_from_slice(&z_trial);
                g.copy_from_slice(&g_trial);
                f = f_new;
                gnorm = norm(&g);
            }
            None => {
                if history.is_empty() {
                    break;
                }
                history.clear();
                gamma = 1.0;
            }
        }
    }
    LbfgsOutcome {
        value: f,
        grad_norm: gnorm,
        iterations,
        converged: gnorm <= settings.grad_tol * (1.0 + f.abs()),
    }
}

/// Backtracking from the unit step. Accepts the Armijo condition, or, once the decrease is
/// lost in rounding, any step that keeps `f` level and shrinks the gradient.
#[allow(clippy::too_many_arguments)]
fn line_search<O: Objective>(
    obj: &mut O,
    z: &[f64],
    f: f64,
    gnorm: f64,
    d: &[f64],
    slope: f64,
    z_trial: &mut [f64],
    g_trial: &mut [f64],
) -> Option<f64> {
    const ARMIJO: f64 = 1e-4;
    let flat = 16.0 * f64::EPSILON * f.abs().max(1.0);
    let mut step = 1.0;
    for _ in 0..60 {
        z_trial
            .iter_mut()
            .zip(z.iter().zip(d))
            .for_each(|(t, (zi, di))| *t = zi + step * di);
        match obj.value_grad(z_trial, g_trial) {
            Some(f_new) if f_new.is_finite() => {
                if f_new <= f + ARMIJO * step * slope {
                    return Some(f_new);
                }
                if f_new <= f + flat && norm(g_trial) < gnorm {
                    return Some(f_new);
                }
                step *= 0.5;
            }
            _ => step *= 0.25,
        }
    }
    None
}
