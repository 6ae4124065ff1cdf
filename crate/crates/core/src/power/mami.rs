use log::debug;
use nalgebra::DMatrix;

use super::kkt::kkt_residual;
use super::rates::LinkModel;
use crate::error::Result;
use crate::linalg::SquareMatrix;
use crate::matching::{build_qos_matrix, check_feasibility, PerClProblem};
use crate::solver::{
    maximize, relative_slack, BarrierOptions, ConcaveObjective, ConcaveProgram, SolveStatus, START_SLACK,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MamiOptions {
    /// Stop once consecutive iterates are this close (mW, Euclidean). NCVL
    /// powers at the optimum are often around 1e-2 mW, so the threshold is
    /// set well below that scale.
    pub eps: f64,
    pub max_outer: usize,
    pub barrier: BarrierOptions,
    /// Weight of the initial interior point in the warm start of later
    /// inner solves.
    pub recenter: f64,
    /// Start the inner solves after the first one at a barrier parameter
    /// matched to the last outer gain, since they begin next to the
    /// previous solution. Off: every solve starts at `barrier.t0`.
    pub warm_barrier: bool,
    /// Linearize at a momentum-extrapolated point when that point is
    /// feasible and does not lower the sum rate; otherwise at the current
    /// iterate.
    pub extrapolate: bool,
}

impl Default for MamiOptions {
    fn default() -> Self {
        Self {
            eps: 1e-9,
            max_outer: 1000,
            barrier: BarrierOptions::default(),
            recenter: 0.01,
            warm_barrier: true,
            extrapolate: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MamiStatus {
    Converged,
    MaxIterations,
    /// The inner solver failed; the best iterate so far is returned.
    InnerFailure,
    /// The feasible set has no interior; the minimum-power point is returned.
    NoInterior,
    /// The group is infeasible; powers are set to the caps.
    Infeasible,
}

/// Optimized powers of one CL group, CVL first.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPower {
    pub p: Vec<f64>,
    pub iterations: usize,
    /// Newton steps spent in all inner solves.
    pub newton_steps: usize,
    pub kkt_residual: f64,
    pub status: MamiStatus,
    /// Sum rate at `p^(0)`, `p^(1)`, ...
    pub objective_trace: Vec<f64>,
    /// `||p^(k) - p^(k-1)||` for `k >= 1`.
    pub step_trace: Vec<f64>,
}

impl GroupPower {
    pub fn sum_rate(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(0.0)
    }

    fn fixed(problem: &PerClProblem, p: Vec<f64>, status: MamiStatus) -> Self {
        let rate = LinkModel::new(problem).sum_rate(&p);
        Self {
            kkt_residual: kkt_residual(&p, problem),
            p,
            iterations: 0,
            newton_steps: 0,
            status,
            objective_trace: vec![rate],
            step_trace: vec![],
        }
    }
}

/// Concave surrogate `r_cav(p) + c^T p` maximized in each outer step.
struct Surrogate<'a> {
    model: &'a LinkModel,
    linear: Vec<f64>,
}

impl ConcaveObjective for Surrogate<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.model.r_cav(x) + dot(&self.linear, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.model.grad_r_cav(x);
        for (gi, ci) in g.iter_mut().zip(&self.linear) {
            *gi += ci;
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.model.hess_r_cav(x))
    }

    fn curvature_factor(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.model.cav_factor(x))
    }

    fn increment(&self, x: &[f64], step: &[f64]) -> f64 {
        let mut inc = dot(&self.linear, step);
        for r in 0..self.model.dim() {
            let (a, b) = self.model.received(r, x);
            let (da, db) = self.model.received_increment(r, step);
            inc += ((da + db) / (a + b)).ln_1p() / std::f64::consts::LN_2;
        }
        inc
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `p + s * dir` clipped to the power box, with `s <= limit` halved until the
/// QoS rows hold. `None` if no tried step is feasible.
fn extrapolate(rows: &[Vec<f64>], rhs: &[f64], upper: &[f64], p: &[f64], dir: &[f64], limit: f64) -> Option<Vec<f64>> {
    let mut s = limit;
    for _ in 0..4 {
        let z: Vec<f64> = p
            .iter()
            .zip(dir)
            .zip(upper)
            .map(|((x, d), &u)| (x + s * d).clamp(0.0, u))
            .collect();
        if rows.iter().zip(rhs).all(|(row, b)| dot(row, &z) >= *b) {
            return Some(z);
        }
        s *= 0.5;
    }
    None
}

/// Doubles the step from `from` through `to` while the sum rate keeps rising
/// and the point stays feasible.
fn overrelax(
    model: &LinkModel,
    rows: &[Vec<f64>],
    rhs: &[f64],
    upper: &[f64],
    from: &[f64],
    to: Vec<f64>,
    value: f64,
) -> (Vec<f64>, f64) {
    let dir: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
    let (mut best, mut best_value) = (to, value);
    let mut eta = 2.0;
    while eta <= 4096.0 {
        let z: Vec<f64> = from.iter().zip(&dir).map(|(x, d)| x + eta * d).collect();
        let inside = z.iter().zip(upper).all(|(&x, &u)| x > 0.0 && x < u)
            && rows.iter().zip(rhs).all(|(row, b)| dot(row, &z) > *b);
        if !inside {
            break;
        }
        let v = model.sum_rate(&z);
        if v <= best_value {
            break;
        }
        best = z;
        best_value = v;
        eta *= 2.0;
    }
    (best, best_value)
}

/// A strictly feasible point near the minimum-power vector `p_init`.
///
/// Scaling `p_init` by `c > 1` raises every QoS left-hand side by the factor
/// `c`, which is strict whenever the targets are positive. When scaling
/// would leave the box or some target is zero, the point is pushed along
/// `H^-1 1` instead, which raises every QoS row by the same positive amount.
/// Returns `None` when the feasible set has no interior.
pub fn interior_start(problem: &PerClProblem, h: &SquareMatrix, p_init: &[f64]) -> Option<Vec<f64>> {
    let caps = &problem.p_max_vec;
    let rows: Vec<&[f64]> = (0..p_init.len()).map(|r| h.row(r)).collect();
    let rhs = problem.qos_rhs();
    let interior = |x: &[f64]| relative_slack(&rows, &rhs, caps, x) >= START_SLACK;
    let ratio = p_init
        .iter()
        .zip(caps)
        .map(|(&p, &cap)| if p > 0.0 { cap / p } else { f64::INFINITY })
        .fold(f64::INFINITY, f64::min);
    let c = ratio.min(1.01);
    if c > 1.0 {
        let scaled: Vec<f64> = p_init.iter().map(|p| c * p).collect();
        if interior(&scaled) {
            return Some(scaled);
        }
    }
    let dir = h.solve(&vec![1.0; p_init.len()], 1e-12)?;
    if dir.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let delta = 0.5
        * p_init
            .iter()
            .zip(caps)
            .zip(&dir)
            .map(|((&p, &cap), &v)| (cap - p) / v)
            .fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = p_init.iter().zip(&dir).map(|(p, v)| p + delta * v).collect();
    (delta > 0.0 && interior(&shifted)).then_some(shifted)
}

/// Maximizes the group sum rate over the QoS-and-power polytope by
/// repeatedly maximizing the concave part plus the linearized convex part.
///
/// `p_init` must be the feasible minimum-power vector of the group. Every
/// iterate is feasible and the sum rate never decreases along the sequence.
pub fn mami_power_allocation(problem: &PerClProblem, p_init: &[f64], opts: &MamiOptions) -> GroupPower {
    let d = problem.n_links();
    if d == 1 {
        // A single increasing log: the cap is optimal.
        let cap = problem.p_max_vec[0];
        let mut out = GroupPower::fixed(problem, vec![cap], MamiStatus::Converged);
        let start = LinkModel::new(problem).sum_rate(p_init);
        out.objective_trace.insert(0, start);
        out.step_trace.push((cap - p_init[0]).abs());
        out.iterations = 1;
        return out;
    }
    let model = LinkModel::new(problem);
    let h = build_qos_matrix(problem);
    let Some(s0) = interior_start(problem, &h, p_init) else {
        debug!("group of {d} links has an empty interior; keeping the minimum-power point");
        return GroupPower::fixed(problem, p_init.to_vec(), MamiStatus::NoInterior);
    };
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|r| h.row(r).iter().map(|v| v / h.get(r, r)).collect())
        .collect();
    let rhs: Vec<f64> = problem
        .qos_rhs()
        .iter()
        .enumerate()
        .map(|(r, b)| b / h.get(r, r))
        .collect();

    let mut p = p_init.to_vec();
    let mut prev = p.clone();
    let mut value = model.sum_rate(&p);
    let mut momentum = 1.0f64;
    let mut last_gain = f64::INFINITY;
    let mut newton_steps = 0;
    let mut objective_trace = vec![value];
    let mut step_trace = Vec::new();
    let mut status = MamiStatus::MaxIterations;
    for k in 0..opts.max_outer {
        let mut anchor = p.clone();
        if opts.extrapolate && k > 0 {
            let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / next;
            momentum = next;
            let dir: Vec<f64> = p.iter().zip(&prev).map(|(a, b)| a - b).collect();
            if beta > 0.0 {
                match extrapolate(&rows, &rhs, &problem.p_max_vec, &p, &dir, beta) {
                    Some(z) if model.sum_rate(&z) >= value => anchor = z,
                    _ => momentum = 1.0,
                }
            }
        }
        let surrogate = Surrogate {
            model: &model,
            linear: model.grad_r_vex(&anchor),
        };
        let mut program = ConcaveProgram {
            objective: &surrogate,
            rows: rows.clone(),
            rhs: rhs.clone(),
            upper: problem.p_max_vec.clone(),
            start: s0.clone(),
        };
        if k > 0 {
            // Pull the warm start off the boundary, more firmly if needed.
            let mut weight = opts.recenter;
            loop {
                program.start = anchor
                    .iter()
                    .zip(&s0)
                    .map(|(a, b)| (1.0 - weight) * a + weight * b)
                    .collect();
                if weight >= 1.0 || program.min_relative_slack(&program.start) >= START_SLACK {
                    break;
                }
                weight = (weight * 10.0).min(1.0);
            }
        }
        let mut barrier = opts.barrier;
        if k > 0 && opts.warm_barrier {
            // The surrogate optimum is roughly one outer gain away, so a
            // duality gap of that size is where the central path starts to
            // matter.
            let m = program.n_constraints() as f64;
            let gain = last_gain.max(barrier.tol);
            barrier.t0 = (m / gain).clamp(barrier.t0, m / barrier.tol);
        }
        let solved = match maximize(&program, &barrier) {
            Ok(out) => out,
            Err(e) => {
                debug!("inner solve rejected its start: {e}");
                status = MamiStatus::InnerFailure;
                break;
            }
        };
        newton_steps += solved.newton_steps;
        let candidate = solved.x;
        let next_value = model.sum_rate(&candidate);
        let usable = program.violation(&candidate) == 0.0 && next_value >= value;
        if solved.status != SolveStatus::Converged {
            debug!(
                "inner solve stopped with {:?} after {} Newton steps at t = {:e}",
                solved.status, solved.newton_steps, solved.t
            );
            if usable {
                step_trace.push(distance(&candidate, &p));
                objective_trace.push(next_value);
                p = candidate;
            }
            status = MamiStatus::InnerFailure;
            break;
        }
        if !usable {
            // No improvement left at working precision.
            status = MamiStatus::Converged;
            break;
        }
        let (candidate, next_value) = if opts.extrapolate {
            overrelax(&model, &rows, &rhs, &problem.p_max_vec, &anchor, candidate, next_value)
        } else {
            (candidate, next_value)
        };
        let step = distance(&candidate, &p);
        step_trace.push(step);
        objective_trace.push(next_value);
        prev = std::mem::replace(&mut p, candidate);
        last_gain = next_value - value;
        value = next_value;
        if step <= opts.eps {
            status = MamiStatus::Converged;
            break;
        }
    }
    GroupPower {
        kkt_residual: kkt_residual(&p, problem),
        iterations: step_trace.len(),
        newton_steps,
        p,
        status,
        objective_trace,
        step_trace,
    }
}

/// Feasibility check followed by power optimization. Infeasible groups get
/// capped powers and are flagged.
pub fn optimize_group(problem: &PerClProblem, opts: &MamiOptions) -> Result<GroupPower> {
    problem.validate()?;
    let feas = check_feasibility(problem);
    match feas.p_init {
        Some(p_init) if feas.feasible => Ok(mami_power_allocation(problem, &p_init, opts)),
        _ => Ok(GroupPower::fixed(problem, problem.p_max_vec.clone(), MamiStatus::Infeasible)),
    }
}
