use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scenario::ChannelGains;

/// How the matching order is derived from the greedy CL assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorityRule {
    /// Weakest assigned CVL-to-BS gain first (largest interference-limited
    /// area first).
    #[default]
    AscendingGain,
    /// The order in which the greedy argmax picked the CVLs.
    ArgmaxOrder,
}

/// CVL priority and CL assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityOrder {
    /// `alpha[k]`: CVL with the `(k+1)`-th highest priority.
    pub alpha: Vec<usize>,
    /// `cl_of_cvl[i]`: CL owned by CVL `i`.
    pub cl_of_cvl: Vec<usize>,
    /// `assigned_gain[k]`: gain of CVL `alpha[k]` on its CL.
    pub assigned_gain: Vec<f64>,
}

impl PriorityOrder {
    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn cl_at(&self, k: usize) -> usize {
        self.cl_of_cvl[self.alpha[k]]
    }

    pub fn is_valid(&self) -> bool {
        is_permutation(&self.alpha) && is_permutation(&self.cl_of_cvl) && self.assigned_gain.len() == self.n()
    }

    fn from_assignment(gains: &ChannelGains, alpha: Vec<usize>, cl_of_cvl: Vec<usize>) -> Self {
        let assigned_gain = alpha.iter().map(|&i| gains.h_c(i, cl_of_cvl[i])).collect();
        Self { alpha, cl_of_cvl, assigned_gain }
    }
}

fn is_permutation(v: &[usize]) -> bool {
    let mut seen = vec![false; v.len()];
    v.iter().all(|&x| x < seen.len() && !std::mem::replace(&mut seen[x], true))
}

/// Greedy CL assignment: repeatedly give the best remaining (CVL, CL) pair
/// by `h_c` to that CVL. Ties go to the lowest CVL index, then lowest CL.
///
/// With [`PriorityRule::AscendingGain`] the matching order then sorts CVLs by
/// their assigned gain, weakest first.
pub fn assign_cvl_priority(gains: &ChannelGains, rule: PriorityRule) -> PriorityOrder {
    let n = gains.n_cvl();
    let mut cvl_free = vec![true; n];
    let mut cl_free = vec![true; n];
    let mut cl_of_cvl = vec![usize::MAX; n];
    let mut picks = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..n).filter(|&i| cvl_free[i]) {
            for l in (0..n).filter(|&l| cl_free[l]) {
                let g = gains.h_c(i, l);
                if best.map_or(true, |(_, _, bg)| g > bg) {
                    best = Some((i, l, g));
                }
            }
        }
        let (i, l, _) = best.expect("free CVL and CL remain");
        cvl_free[i] = false;
        cl_free[l] = false;
        cl_of_cvl[i] = l;
        picks.push(i);
    }
    let alpha = match rule {
        PriorityRule::ArgmaxOrder => picks,
        PriorityRule::AscendingGain => {
            let mut order = picks;
            // Stable sort keeps the tie rule deterministic.
            order.sort_by(|&a, &b| {
                gains
                    .h_c(a, cl_of_cvl[a])
                    .total_cmp(&gains.h_c(b, cl_of_cvl[b]))
                    .then(a.cmp(&b))
            });
            order
        }
    };
    PriorityOrder::from_assignment(gains, alpha, cl_of_cvl)
}

/// Uniformly random priority order and CL assignment.
pub fn random_cvl_priority<R: Rng + ?Sized>(gains: &ChannelGains, rng: &mut R) -> PriorityOrder {
    let n = gains.n_cvl();
    let mut alpha: Vec<usize> = (0..n).collect();
    alpha.shuffle(rng);
    let mut cl_of_cvl: Vec<usize> = (0..n).collect();
    cl_of_cvl.shuffle(rng);
    PriorityOrder::from_assignment(gains, alpha, cl_of_cvl)
}
