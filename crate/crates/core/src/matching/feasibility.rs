use log::warn;

use super::problem::{build_qos_matrix, PerClProblem};
use crate::linalg::SquareMatrix;

/// Pivot threshold, relative to `||H||_inf`.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub feasible: bool,
    /// `sigma^2 H^-1 gamma`, present whenever `H` could be factored.
    pub p_init: Option<Vec<f64>>,
    pub h_matrix: SquareMatrix,
    /// `H` was numerically singular; the group is reported infeasible.
    pub singular: bool,
}

/// Closed-form feasibility test for one CL group.
///
/// `H` is a Z-matrix, so the QoS-and-power polytope is non-empty exactly
/// when the point `sigma^2 H^-1 gamma` lies in the power box. That point is
/// also the componentwise smallest power vector meeting every QoS target.
pub fn check_feasibility(problem: &PerClProblem) -> FeasibilityResult {
    let h = build_qos_matrix(problem);
    let d = problem.n_links();
    if problem.gamma_vec.iter().all(|&g| g == 0.0) {
        return FeasibilityResult {
            feasible: problem.p_max_vec.iter().all(|&p| p >= 0.0),
            p_init: Some(vec![0.0; d]),
            h_matrix: h,
            singular: false,
        };
    }
    let rhs = problem.qos_rhs();
    let Some(mut p) = h.solve(&rhs, SINGULAR_TOL) else {
        warn!("QoS matrix of a {d}-link group is singular; treating the group as infeasible");
        return FeasibilityResult {
            feasible: false,
            p_init: None,
            h_matrix: h,
            singular: true,
        };
    };
    // Components whose threshold is 0 can come out as -0.0 or a round-off
    // negative; snap those to zero.
    for (x, cap) in p.iter_mut().zip(&problem.p_max_vec) {
        if *x < 0.0 && *x >= -1e-12 * cap.max(f64::MIN_POSITIVE) {
            *x = 0.0;
        }
    }
    let feasible = p
        .iter()
        .zip(&problem.p_max_vec)
        .all(|(&x, &cap)| x >= 0.0 && x <= cap);
    FeasibilityResult {
        feasible,
        p_init: Some(p),
        h_matrix: h,
        singular: false,
    }
}
