use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::{grid_neighbors, oracle_feasible, random_group};
use crate::error::Result;
use crate::matching::{check_feasibility, PerClProblem};
use crate::power::{optimize_group, LinkModel, MamiOptions, MamiStatus};

/// Box clearance a minimum-power point needs before the closed-form test and
/// the vertex oracle are required to agree, relative to the cap.
pub const CLEARANCE: f64 = 1e-6;
/// Largest KKT residual accepted at a power-allocation endpoint.
pub const KKT_TOL: f64 = 1e-4;
/// Largest drop accepted between consecutive objective values.
pub const ASCENT_TOL: f64 = 1e-9;
/// How much a grid neighbor may beat an endpoint, in bits/s/Hz.
pub const GRID_TOL: f64 = 1e-3;

/// The minimum-power point of `problem` exists and is at least
/// `CLEARANCE * p_max` away from every box face.
pub fn clears_box(problem: &PerClProblem) -> bool {
    match check_feasibility(problem).p_init {
        Some(p) => p.iter().zip(&problem.p_max_vec).all(|(&x, &cap)| {
            let margin = CLEARANCE * cap;
            (x > margin || x < -margin) && (x < cap - margin || x > cap + margin)
        }),
        None => false,
    }
}

/// Closed-form test against the vertex oracle; `None` when they agree.
pub fn feasibility_mismatch(problem: &PerClProblem) -> Result<Option<String>> {
    let closed = check_feasibility(problem).feasible;
    let oracle = oracle_feasible(problem)?;
    Ok((closed != oracle).then(|| format!("closed form says {closed}, vertex oracle says {oracle}")))
}

/// Largest relative QoS or box violation at `p`.
pub fn constraint_violation(problem: &PerClProblem, p: &[f64]) -> f64 {
    let model = LinkModel::new(problem);
    let qos = model
        .sinrs(p)
        .iter()
        .zip(&problem.gamma_vec)
        .map(|(s, g)| if *g > 0.0 { (g - s) / g } else { 0.0 })
        .fold(0.0f64, f64::max);
    let boxes = p
        .iter()
        .zip(&problem.p_max_vec)
        .map(|(&x, &cap)| ((-x).max(x - cap) / cap.max(f64::MIN_POSITIVE)).max(0.0))
        .fold(0.0f64, f64::max);
    qos.max(boxes)
}

/// Problems found in the power allocation of one feasible group.
pub fn power_violations(problem: &PerClProblem, opts: &MamiOptions, grid: Option<usize>) -> Result<Vec<String>> {
    let out = optimize_group(problem, opts)?;
    let mut bad = Vec::new();
    if out.status == MamiStatus::Infeasible {
        return Ok(bad);
    }
    let trace = &out.objective_trace;
    if let Some(w) = trace.windows(2).find(|w| w[1] - w[0] < -ASCENT_TOL) {
        bad.push(format!("objective drops from {} to {}", w[0], w[1]));
    }
    if trace.len() > 2 && !trace.windows(2).any(|w| w[1] > w[0]) {
        bad.push("no strict increase over several iterations".into());
    }
    if !(out.kkt_residual <= KKT_TOL) {
        bad.push(format!("KKT residual {:e} ({:?})", out.kkt_residual, out.status));
    }
    let viol = constraint_violation(problem, &out.p);
    if viol > 1e-6 {
        bad.push(format!("constraint violation {viol:e}"));
    }
    if let Some(resolution) = grid {
        if problem.n_links() <= 2 {
            let check = grid_neighbors(problem, &out.p, resolution)?;
            if check.gap() > GRID_TOL {
                bad.push(format!("grid neighbor beats the endpoint by {:e}", check.gap()));
            }
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleReport {
    pub feasibility_checked: usize,
    pub power_checked: usize,
    pub violations: Vec<String>,
}

/// Random groups of one to three links against every oracle: feasibility
/// agreement, monotone ascent, stationarity, constraint satisfaction and
/// (two links or fewer) the grid-neighbor certificate.
pub fn oracle_check(instances: usize, seed: u64, resolution: usize) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = MamiOptions::default();
    let mut report = OracleReport::default();
    for k in 0..instances {
        let links = rng.gen_range(1..=3);
        let problem = random_group(&mut rng, links);
        if clears_box(&problem) {
            report.feasibility_checked += 1;
            if let Some(msg) = feasibility_mismatch(&problem)? {
                report.violations.push(format!("instance {k}: {msg}"));
            }
        }
        if check_feasibility(&problem).feasible {
            report.power_checked += 1;
            for msg in power_violations(&problem, &opts, Some(resolution))? {
                report.violations.push(format!("instance {k}: {msg}"));
            }
        }
    }
    Ok(report)
}
