use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::gram;

/// A smooth concave function to maximize.
pub trait ConcaveObjective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Analytic Hessian, if available. Central differences of the gradient
    /// are used otherwise.
    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// A matrix `F` with `hessian = -F^T F`, if known. Lets the solver form
    /// its Newton system as a single Gram product.
    fn curvature_factor(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// `value(x + step) - value(x)`. Override when the increment can be
    /// formed without cancellation.
    fn increment(&self, x: &[f64], step: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().zip(step).map(|(a, b)| a + b).collect();
        self.value(&y) - self.value(x)
    }
}

/// `max f(x)` subject to `rows[c] . x >= rhs[c]` and `0 <= x <= upper`.
pub struct ConcaveProgram<'a> {
    pub objective: &'a dyn ConcaveObjective,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub upper: Vec<f64>,
    /// Strictly interior starting point.
    pub start: Vec<f64>,
}

impl ConcaveProgram<'_> {
    pub fn n_constraints(&self) -> usize {
        self.rows.len() + 2 * self.upper.len()
    }

    fn row_slack(&self, c: usize, x: &[f64]) -> f64 {
        dot(&self.rows[c], x) - self.rhs[c]
    }

    /// Smallest slack over all constraints.
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        let rows = (0..self.rows.len()).map(|c| self.row_slack(c, x));
        let boxes = x.iter().zip(&self.upper).flat_map(|(&v, &u)| [v, u - v]);
        rows.chain(boxes).fold(f64::INFINITY, f64::min)
    }

    /// Smallest slack of each constraint divided by the magnitude of the
    /// terms it is formed from, so that the test means the same thing for
    /// links whose powers differ by many orders of magnitude.
    pub fn min_relative_slack(&self, x: &[f64]) -> f64 {
        relative_slack(&self.rows, &self.rhs, &self.upper, x)
    }

    /// Largest constraint violation (0 when feasible).
    pub fn violation(&self, x: &[f64]) -> f64 {
        (-self.min_slack(x)).max(0.0)
    }
}

/// Smallest slack of `rows x >= rhs` and `0 < x < upper`, each measured
/// against the terms it is formed from.
pub fn relative_slack<R: AsRef<[f64]>>(rows: &[R], rhs: &[f64], upper: &[f64], x: &[f64]) -> f64 {
    let rows = rows.iter().zip(rhs).map(|(a, &b)| {
        let a = a.as_ref();
        let ax: f64 = a.iter().zip(x).map(|(a, v)| a * v).sum();
        let scale = b.abs() + a.iter().zip(x).map(|(a, v)| (a * v).abs()).sum::<f64>();
        (ax - b) / scale.max(f64::MIN_POSITIVE)
    });
    let boxes = x.iter().zip(upper).flat_map(|(&v, &u)| {
        let lower = if v > 0.0 { 1.0 } else { v };
        [lower, (u - v) / u.abs().max(f64::MIN_POSITIVE)]
    });
    rows.chain(boxes).fold(f64::INFINITY, f64::min)
}

/// Smallest relative slack accepted at the start point.
pub const START_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierOptions {
    /// Target duality-gap bound `m / t` and Newton decrement threshold.
    pub tol: f64,
    pub t0: f64,
    pub mu: f64,
    pub armijo: f64,
    pub backtrack: f64,
    /// Fraction of the maximal feasible step that may be taken.
    pub step_fraction: f64,
    pub damping: f64,
    pub max_newton_per_center: usize,
    pub max_newton_total: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            t0: 1.0,
            mu: 10.0,
            armijo: 0.3,
            backtrack: 0.5,
            step_fraction: 0.99,
            damping: 1e-10,
            max_newton_per_center: 100,
            max_newton_total: 2000,
        }
    }
}

impl BarrierOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    NumericFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub status: SolveStatus,
    pub newton_steps: usize,
    pub t: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fd_hessian(obj: &dyn ConcaveObjective, x: &[f64], max_step: f64) -> DMatrix<f64> {
    let d = x.len();
    let mut h = DMatrix::zeros(d, d);
    let mut xp = x.to_vec();
    for i in 0..d {
        let step = (1e-6 * (1.0 + x[i].abs())).min(0.5 * max_step);
        xp[i] = x[i] + step;
        let gp = obj.gradient(&xp);
        xp[i] = x[i] - step;
        let gm = obj.gradient(&xp);
        xp[i] = x[i];
        for j in 0..d {
            h[(j, i)] = (gp[j] - gm[j]) / (2.0 * step);
        }
    }
    (&h + h.transpose()) * 0.5
}

/// Random second-difference probe of concavity at `x` along a few fixed
/// directions. Only used under debug assertions.
fn looks_concave(obj: &dyn ConcaveObjective, x: &[f64], reach: f64) -> bool {
    let d = x.len();
    (0..3).all(|k| {
        let dir: Vec<f64> = (0..d)
            .map(|i| (((i + 1) * (k + 3)) as f64 * 0.618_033_988_75).fract() - 0.5)
            .collect();
        let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let h = 0.25 * reach / n;
        let step: Vec<f64> = dir.iter().map(|v| v * h).collect();
        let back: Vec<f64> = step.iter().map(|v| -v).collect();
        let second = obj.increment(x, &step) + obj.increment(x, &back);
        second <= 1e-9 * (1.0 + obj.value(x).abs())
    })
}

/// Barrier state evaluated at one point.
struct Local {
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

/// Maximizes a concave objective over a polytope with a log-barrier method.
///
/// The barrier parameter starts at `t0` and grows by `mu` until
/// `m / t <= tol`; each centering step is a damped Newton iteration with
/// Armijo backtracking and steps capped at `step_fraction` of the distance
/// to the boundary, so every iterate stays strictly feasible.
pub fn maximize(program: &ConcaveProgram<'_>, opts: &BarrierOptions) -> Result<SolveOutcome> {
    let obj = program.objective;
    let d = obj.dim();
    let n_rows = program.rows.len();
    if program.start.len() != d || program.upper.len() != d || program.rhs.len() != n_rows {
        return Err(Error::InvalidParams("program dimensions disagree".into()));
    }
    let start_slack = program.min_relative_slack(&program.start);
    if !(start_slack >= START_SLACK) {
        return Err(Error::Domain(format!(
            "start point is not strictly interior (relative slack {start_slack:e})"
        )));
    }
    debug_assert!(
        looks_concave(obj, &program.start, program.min_slack(&program.start)),
        "objective failed a concavity spot check"
    );
    let m = program.n_constraints() as f64;
    let mut x = program.start.clone();
    let mut t = opts.t0;
    let mut steps = 0usize;
    let mut status = SolveStatus::Converged;

    let local = |x: &[f64], t: f64| -> Local {
        let mut grad = DVector::from_vec(obj.gradient(x)) * (-t);
        let slacks: Vec<f64> = (0..n_rows).map(|c| program.row_slack(c, x)).collect();
        for (a, s) in program.rows.iter().zip(&slacks) {
            for i in 0..d {
                grad[i] -= a[i] / s;
            }
        }
        let mut hess = match obj.curvature_factor(x) {
            Some(f) => {
                // Stack sqrt(t) F over the slack-scaled rows; the Hessian of
                // the barrier function is the Gram matrix of the stack.
                let k = f.nrows();
                let root_t = t.sqrt();
                let stack = DMatrix::from_fn(k + n_rows, d, |r, i| {
                    if r < k {
                        root_t * f[(r, i)]
                    } else {
                        program.rows[r - k][i] / slacks[r - k]
                    }
                });
                gram(&stack)
            }
            None => {
                let mut hess = match obj.hessian(x) {
                    Some(h) => h * (-t),
                    None => fd_hessian(obj, x, program.min_slack(x)) * (-t),
                };
                for (a, s) in program.rows.iter().zip(&slacks) {
                    for i in 0..d {
                        let ai = a[i] / (s * s);
                        if ai != 0.0 {
                            for j in 0..d {
                                hess[(i, j)] += ai * a[j];
                            }
                        }
                    }
                }
                hess
            }
        };
        for i in 0..d {
            let lo = x[i];
            let hi = program.upper[i] - x[i];
            grad[i] += -1.0 / lo + 1.0 / hi;
            hess[(i, i)] += 1.0 / (lo * lo) + 1.0 / (hi * hi);
        }
        Local { grad, hess }
    };

    // Change in the barrier function along `step`, formed from increments.
    let barrier_increment = |x: &[f64], step: &[f64], t: f64| -> f64 {
        let mut inc = -t * obj.increment(x, step);
        for c in 0..n_rows {
            let s = program.row_slack(c, x);
            inc -= (dot(&program.rows[c], step) / s).ln_1p();
        }
        for i in 0..d {
            let lo = x[i];
            let hi = program.upper[i] - x[i];
            inc -= (step[i] / lo).ln_1p() + (-step[i] / hi).ln_1p();
        }
        inc
    };

    'outer: loop {
        for _ in 0..opts.max_newton_per_center {
            if steps >= opts.max_newton_total {
                status = SolveStatus::MaxIterations;
                break 'outer;
            }
            let Local { grad, hess } = local(&x, t);
            let Some(delta) = newton_direction(hess, &grad, opts.damping) else {
                status = SolveStatus::NumericFailure;
                break 'outer;
            };
            let decrement = -grad.dot(&delta);
            if !decrement.is_finite() {
                status = SolveStatus::NumericFailure;
                break 'outer;
            }
            // Half the squared decrement bounds the centering error of `t f`;
            // scaled by `t` it stays at `tol` in objective units, capped so
            // Newton remains in its quadratic region.
            if decrement / 2.0 <= opts.tol.max((opts.tol * t).min(1e-3)) {
                break;
            }
            steps += 1;
            let mut alpha_max = f64::INFINITY;
            for c in 0..n_rows {
                let rate = dot(&program.rows[c], delta.as_slice());
                if rate < 0.0 {
                    alpha_max = alpha_max.min(program.row_slack(c, &x) / -rate);
                }
            }
            for i in 0..d {
                if delta[i] < 0.0 {
                    alpha_max = alpha_max.min(x[i] / -delta[i]);
                } else if delta[i] > 0.0 {
                    alpha_max = alpha_max.min((program.upper[i] - x[i]) / delta[i]);
                }
            }
            let mut alpha = (opts.step_fraction * alpha_max).min(1.0);
            let slope = grad.dot(&delta);
            let accepted = loop {
                let step: Vec<f64> = delta.iter().map(|v| v * alpha).collect();
                let inc = barrier_increment(&x, &step, t);
                if inc.is_finite() && inc <= opts.armijo * alpha * slope {
                    let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
                    if program.min_slack(&trial) > 0.0 {
                        break Some(step);
                    }
                }
                alpha *= opts.backtrack;
                if alpha < 1e-30 {
                    break None;
                }
            };
            match accepted {
                Some(step) => {
                    for (xi, si) in x.iter_mut().zip(&step) {
                        *xi += si;
                    }
                }
                // No representable decrease left: the point is centered to
                // working precision.
                None => break,
            }
        }
        if m / t <= opts.tol {
            break;
        }
        t *= opts.mu;
    }
    // Guard the strict-feasibility contract against round-off in the last step.
    if program.min_slack(&x) <= 0.0 {
        status = SolveStatus::NumericFailure;
    }
    Ok(SolveOutcome {
        value: obj.value(&x),
        x,
        status,
        newton_steps: steps,
        t,
    })
}

/// Solves `H d = -g` with `H` symmetrically scaled to unit diagonal first,
/// adding Levenberg damping to the scaled system when Cholesky fails.
fn newton_direction(mut hess: DMatrix<f64>, grad: &DVector<f64>, damping: f64) -> Option<DVector<f64>> {
    let d = grad.len();
    let scale = DVector::from_fn(d, |i, _| {
        let h = hess[(i, i)];
        if h > 0.0 && h.is_finite() {
            1.0 / h.sqrt()
        } else {
            1.0
        }
    });
    for j in 0..d {
        for i in 0..d {
            hess[(i, j)] *= scale[i] * scale[j];
        }
    }
    let rhs = -grad.component_mul(&scale);
    let mut lambda = damping;
    for _ in 0..12 {
        let mut h = hess.clone();
        for i in 0..d {
            h[(i, i)] += lambda;
        }
        if let Some(chol) = h.cholesky() {
            let dir = chol.solve(&rhs).component_mul(&scale);
            if dir.iter().all(|v| v.is_finite()) {
                return Some(dir);
            }
        }
        lambda *= 100.0;
    }
    None
}
