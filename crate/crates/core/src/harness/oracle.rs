//! Brute-force checks for small groups: vertex enumeration for feasibility
//! and grid scans for the power allocation.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matching::{build_qos_matrix, PerClProblem};
use crate::power::LinkModel;
use crate::scenario::{generate_scenario, SimParams};

/// Constraint tolerance used by the vertex test, relative to the terms of
/// each constraint.
pub const VERTEX_TOL: f64 = 1e-9;
/// Random box samples drawn after the vertex enumeration.
pub const ORACLE_SAMPLES: usize = 10_000;
pub const MAX_FEASIBILITY_DIM: usize = 3;
pub const MAX_GRID_DIM: usize = 2;
pub const MAX_GRID_RESOLUTION: usize = 1000;

/// `a . x >= b` for every QoS row and both faces of every box side.
fn halfspaces(problem: &PerClProblem) -> Vec<(Vec<f64>, f64)> {
    let d = problem.n_links();
    let h = build_qos_matrix(problem);
    let rhs = problem.qos_rhs();
    let mut out: Vec<(Vec<f64>, f64)> = (0..d).map(|r| (h.row(r).to_vec(), rhs[r])).collect();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        out.push((e.clone(), 0.0));
        e[i] = -1.0;
        out.push((e, -problem.p_max_vec[i]));
    }
    out
}

fn satisfies(cons: &[(Vec<f64>, f64)], x: &[f64], tol: f64) -> bool {
    cons.iter().all(|(a, b)| {
        let ax: f64 = a.iter().zip(x).map(|(a, v)| a * v).sum();
        let scale = b.abs() + a.iter().zip(x).map(|(a, v)| (a * v).abs()).sum::<f64>();
        ax - b >= -tol * scale
    })
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Decides whether `{p : H p >= sigma^2 gamma, 0 <= p <= p_max}` is
/// nonempty without the M-matrix argument.
///
/// The set is a bounded polyhedron, so it is nonempty exactly when one of
/// the intersection points of `d` constraint hyperplanes satisfies every
/// constraint. Uniform samples from the power box back up the enumeration.
pub fn oracle_feasible(problem: &PerClProblem) -> Result<bool> {
    let d = problem.n_links();
    if d > MAX_FEASIBILITY_DIM {
        return Err(Error::UnsupportedDimension {
            dim: d,
            max: MAX_FEASIBILITY_DIM,
        });
    }
    let cons = halfspaces(problem);
    for pick in subsets(cons.len(), d) {
        let a = DMatrix::from_fn(d, d, |r, c| cons[pick[r]].0[c]);
        let b = DVector::from_fn(d, |r, _| cons[pick[r]].1);
        let Some(x) = a.lu().solve(&b) else { continue };
        if x.iter().all(|v| v.is_finite()) && satisfies(&cons, x.as_slice(), VERTEX_TOL) {
            return Ok(true);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut x = vec![0.0; d];
    for _ in 0..ORACLE_SAMPLES {
        for (xi, &cap) in x.iter_mut().zip(&problem.p_max_vec) {
            *xi = rng.gen::<f64>() * cap;
        }
        if satisfies(&cons, &x, 0.0) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Regular grid over the power box with `resolution` nodes per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerGrid {
    pub spacing: Vec<f64>,
    pub resolution: usize,
}

impl PowerGrid {
    pub fn new(problem: &PerClProblem, resolution: usize) -> Result<Self> {
        let d = problem.n_links();
        if d > MAX_GRID_DIM {
            return Err(Error::UnsupportedDimension { dim: d, max: MAX_GRID_DIM });
        }
        if !(2..=MAX_GRID_RESOLUTION).contains(&resolution) {
            return Err(Error::InvalidParams(format!(
                "grid resolution must be in 2..={MAX_GRID_RESOLUTION}, got {resolution}"
            )));
        }
        let spacing = problem
            .p_max_vec
            .iter()
            .map(|cap| cap / (resolution - 1) as f64)
            .collect();
        Ok(Self { spacing, resolution })
    }

    pub fn node(&self, index: &[usize]) -> Vec<f64> {
        index.iter().zip(&self.spacing).map(|(&i, h)| i as f64 * h).collect()
    }

    /// Every node index, first axis slowest.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..self.spacing.len() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..self.resolution).map(move |i| {
                        let mut v = prefix.clone();
                        v.push(i);
                        v
                    })
                })
                .collect();
        }
        out
    }
}

/// QoS rows hold at `p` (box membership is implied by the grid).
fn meets_qos(problem: &PerClProblem, model: &LinkModel, p: &[f64]) -> bool {
    model
        .sinrs(p)
        .iter()
        .zip(&problem.gamma_vec)
        .all(|(s, g)| *s >= *g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub p: Vec<f64>,
    pub sum_rate: f64,
}

/// Best feasible node of a `resolution`-per-axis grid, by sum rate; `None`
/// if no node meets every QoS target.
pub fn oracle_power(problem: &PerClProblem, resolution: usize) -> Result<Option<GridPoint>> {
    let grid = PowerGrid::new(problem, resolution)?;
    let model = LinkModel::new(problem);
    let mut best: Option<GridPoint> = None;
    for idx in grid.indices() {
        let p = grid.node(&idx);
        if !meets_qos(problem, &model, &p) {
            continue;
        }
        let sum_rate = model.sum_rate(&p);
        if best.as_ref().map_or(true, |b| sum_rate > b.sum_rate) {
            best = Some(GridPoint { p, sum_rate });
        }
    }
    Ok(best)
}

/// Comparison of a candidate optimum with the grid nodes around it.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborCheck {
    pub value: f64,
    /// Best sum rate among the feasible nodes of the 3x3 stencil centered on
    /// the node nearest to the candidate; `-inf` if none is feasible.
    pub best_neighbor: f64,
    pub feasible_neighbors: usize,
}

impl NeighborCheck {
    /// How much the best neighbor beats the candidate (negative when the
    /// candidate wins).
    pub fn gap(&self) -> f64 {
        self.best_neighbor - self.value
    }
}

pub fn grid_neighbors(problem: &PerClProblem, p: &[f64], resolution: usize) -> Result<NeighborCheck> {
    let grid = PowerGrid::new(problem, resolution)?;
    let model = LinkModel::new(problem);
    let last = resolution - 1;
    let center: Vec<usize> = p
        .iter()
        .zip(&grid.spacing)
        .map(|(x, h)| if *h > 0.0 { ((x / h).round().max(0.0) as usize).min(last) } else { 0 })
        .collect();
    let mut stencil = vec![Vec::new()];
    for &c in &center {
        stencil = stencil
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (c.saturating_sub(1)..=(c + 1).min(last)).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    let mut best_neighbor = f64::NEG_INFINITY;
    let mut feasible_neighbors = 0;
    for idx in stencil {
        let q = grid.node(&idx);
        if meets_qos(problem, &model, &q) {
            feasible_neighbors += 1;
            best_neighbor = best_neighbor.max(model.sum_rate(&q));
        }
    }
    Ok(NeighborCheck {
        value: model.sum_rate(p),
        best_neighbor,
        feasible_neighbors,
    })
}

/// A group with `links` links (CVL plus `links - 1` NCVLs) cut from a
/// freshly drawn small cell with the reference parameters.
pub fn random_group<R: Rng + ?Sized>(rng: &mut R, links: usize) -> PerClProblem {
    assert!(links >= 1, "a group has at least its CVL");
    let n_cvl = rng.gen_range(1..=3);
    let n_ncvl = (4 * n_cvl).max(links);
    let params = SimParams {
        rng_seed: rng.gen(),
        ..SimParams::with_size(n_cvl, n_ncvl)
    };
    let scenario = generate_scenario(&params).expect("reference parameters are valid");
    let cvl = rng.gen_range(0..n_cvl);
    let cl = rng.gen_range(0..n_cvl);
    let beta = sample(rng, n_ncvl, links - 1).into_vec();
    PerClProblem::for_group(&scenario, cvl, cl, &beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::check_feasibility;

    fn two_link(p_max: f64, gamma: f64) -> PerClProblem {
        PerClProblem {
            g_c: 1.0,
            g_db: vec![0.1],
            g_d: vec![1.0],
            g_cd: vec![0.1],
            g_dd: vec![vec![1.0]],
            gamma_vec: vec![gamma, gamma],
            p_max_vec: vec![p_max, p_max],
            noise: 0.1,
        }
    }

    #[test]
    fn worked_instance_agrees_with_closed_form() {
        let prob = two_link(10.0, 1.0);
        assert!(oracle_feasible(&prob).unwrap());
        assert!(check_feasibility(&prob).feasible);
        // The minimum-power point is ~0.111 per link; a cap of 0.1 cuts it.
        let capped = two_link(0.1, 1.0);
        assert!(!oracle_feasible(&capped).unwrap());
        assert!(!check_feasibility(&capped).feasible);
    }

    #[test]
    fn zero_caps_with_positive_targets_are_infeasible() {
        assert!(!oracle_feasible(&two_link(0.0, 1.0)).unwrap());
    }

    #[test]
    fn zero_targets_are_feasible() {
        assert!(oracle_feasible(&two_link(0.0, 0.0)).unwrap());
        assert!(oracle_feasible(&two_link(5.0, 0.0)).unwrap());
    }

    #[test]
    fn large_groups_are_unsupported() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let prob = random_group(&mut rng, 4);
        assert!(matches!(
            oracle_feasible(&prob),
            Err(Error::UnsupportedDimension { dim: 4, max: 3 })
        ));
        assert!(matches!(
            oracle_power(&random_group(&mut rng, 3), 10),
            Err(Error::UnsupportedDimension { dim: 3, max: 2 })
        ));
        assert!(oracle_power(&two_link(1.0, 1.0), 1001).is_err());
    }

    #[test]
    fn single_link_grid_best_is_the_cap() {
        let prob = PerClProblem::standalone(2.0, 1.0, 10.0, 0.5);
        let best = oracle_power(&prob, 101).unwrap().unwrap();
        assert_eq!(best.p, vec![10.0]);
        assert!((best.sum_rate - 41f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn grid_best_beats_minimum_power() {
        let prob = two_link(10.0, 1.0);
        let p_init = check_feasibility(&prob).p_init.unwrap();
        let best = oracle_power(&prob, 200).unwrap().unwrap();
        assert!(best.sum_rate >= LinkModel::new(&prob).sum_rate(&p_init));
    }

    #[test]
    fn stencil_is_clamped_at_corners() {
        let prob = two_link(10.0, 0.0);
        let check = grid_neighbors(&prob, &[10.0, 10.0], 11).unwrap();
        assert_eq!(check.feasible_neighbors, 4);
        let best = oracle_power(&prob, 11).unwrap().unwrap();
        assert_eq!(grid_neighbors(&prob, &best.p, 11).unwrap().gap(), 0.0);
    }

    #[test]
    fn random_groups_have_requested_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for links in 1..=3 {
            let prob = random_group(&mut rng, links);
            assert_eq!(prob.n_links(), links);
            prob.validate().unwrap();
        }
    }
}
