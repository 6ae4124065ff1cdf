use nalgebra::{DMatrix, DVector};

use super::rates::LinkModel;
use crate::linalg::nnls;
use crate::matching::{build_qos_matrix, PerClProblem};

/// Slack, relative to the link's power cap, below which a constraint is
/// treated as active.
pub const ACTIVE_TOL: f64 = 1e-6;

/// Outward normals (gradients of `c(p) >= 0`) of the constraints active at `p`.
pub fn active_normals(p: &[f64], problem: &PerClProblem) -> Vec<Vec<f64>> {
    let d = problem.n_links();
    let h = build_qos_matrix(problem);
    let rhs = problem.qos_rhs();
    let mut normals = Vec::new();
    for r in 0..d {
        let scale = h.get(r, r);
        let row: Vec<f64> = h.row(r).iter().map(|v| v / scale).collect();
        let slack = row.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() - rhs[r] / scale;
        if slack <= ACTIVE_TOL * problem.p_max_vec[r] {
            normals.push(row);
        }
    }
    for i in 0..d {
        let cap = problem.p_max_vec[i];
        if p[i] <= ACTIVE_TOL * cap {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            normals.push(e);
        }
        if cap - p[i] <= ACTIVE_TOL * cap {
            let mut e = vec![0.0; d];
            e[i] = -1.0;
            normals.push(e);
        }
    }
    normals
}

/// Stationarity residual of the sum-rate maximization at `p`: the smallest
/// `||grad R(p) + sum lambda_c n_c||_inf` over nonnegative multipliers on the
/// active constraints.
pub fn kkt_residual(p: &[f64], problem: &PerClProblem) -> f64 {
    let grad = LinkModel::new(problem).grad_sum_rate(p);
    let normals = active_normals(p, problem);
    let g = DVector::from_vec(grad);
    if normals.is_empty() {
        return g.amax();
    }
    let n = DMatrix::from_fn(g.len(), normals.len(), |i, c| normals[c][i]);
    let lambda = nnls(&n, &(-&g));
    (g + n * lambda).amax()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_link_at_cap() {
        let prob = PerClProblem::standalone(2.0, 1.0, 5.0, 0.5);
        assert!(kkt_residual(&[5.0], &prob) < 1e-15);
        // Below the cap the gradient is unopposed.
        let r = kkt_residual(&[3.0], &prob);
        let g = 2.0 / ((0.5 + 6.0) * std::f64::consts::LN_2);
        assert!((r - g).abs() < 1e-12);
    }

    #[test]
    fn interior_zero_gradient_vanishes() {
        // Equal mutual interference makes the symmetric point a critical
        // point only when the gradient vanishes; use a point where it does
        // not and check the residual equals the raw gradient norm instead.
        let prob = crate::matching::problem::fixtures::two_link(0.1, 10.0);
        let p = [2.0, 3.0];
        let g = LinkModel::new(&prob).grad_sum_rate(&p);
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((kkt_residual(&p, &prob) - gmax).abs() < 1e-15);
    }

    #[test]
    fn multiplier_sign_is_enforced() {
        // At p = 0 (both lower bounds active, QoS off) the gradient points
        // inward, so the lower-bound normals cannot cancel it.
        let mut prob = crate::matching::problem::fixtures::two_link(0.1, 10.0);
        prob.gamma_vec = vec![0.0, 0.0];
        let r = kkt_residual(&[0.0, 0.0], &prob);
        assert!(r > 1.0);
    }

    #[test]
    fn corner_maximum_is_stationary() {
        // Weak cross gains: both links at their caps is a local maximum.
        let prob = crate::matching::problem::fixtures::two_link(0.1, 1.0);
        assert!(kkt_residual(&[1.0, 1.0], &prob) < 1e-12);
    }
}
