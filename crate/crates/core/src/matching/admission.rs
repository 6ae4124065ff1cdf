use super::feasibility::check_feasibility;
use super::problem::PerClProblem;
use super::selection::MinMaxScores;
use crate::scenario::Scenario;

/// The unadmitted NCVLs of a cell, `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct NcvlPool {
    member: Vec<bool>,
    len: usize,
}

impl NcvlPool {
    pub fn full(m: usize) -> Self {
        Self { member: vec![true; m], len: m }
    }

    pub fn contains(&self, j: usize) -> bool {
        self.member[j]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn remove(&mut self, j: usize) -> bool {
        let was = std::mem::replace(&mut self.member[j], false);
        self.len -= usize::from(was);
        was
    }

    pub fn flags(&self) -> &[bool] {
        &self.member
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.member.iter().enumerate().filter(|(_, &m)| m).map(|(j, _)| j)
    }
}

/// Matching state of one CL: its CVL, the admitted NCVLs `beta` and the
/// candidate pool `U_i`.
#[derive(Debug, Clone)]
pub struct ClState {
    pub cvl: usize,
    pub cl: usize,
    pub beta: Vec<usize>,
    pub problem: PerClProblem,
    /// Minimum-power vector of the current group.
    pub p_init: Vec<f64>,
    /// The CVL cannot meet its own QoS even alone.
    pub standalone_infeasible: bool,
    pub candidates: NcvlPool,
    scores: MinMaxScores,
}

impl ClState {
    pub fn new(scenario: &Scenario, cvl: usize, cl: usize, pool: &NcvlPool) -> Self {
        let problem = PerClProblem::for_group(scenario, cvl, cl, &[]);
        let feas = check_feasibility(&problem);
        let standalone_infeasible = !feas.feasible;
        Self {
            cvl,
            cl,
            beta: Vec::new(),
            p_init: feas.p_init.unwrap_or_else(|| problem.p_max_vec.clone()),
            problem,
            standalone_infeasible,
            candidates: pool.clone(),
            scores: MinMaxScores::new(&scenario.gains, cvl, cl),
        }
    }

    /// `U_i <- U`.
    pub fn reset_candidates(&mut self, pool: &NcvlPool) {
        self.candidates = pool.clone();
    }

    /// Min-max choice from `U_i`.
    pub fn best_candidate(&self) -> Option<usize> {
        self.scores.best(self.candidates.flags())
    }

    pub fn score(&self, j: usize) -> f64 {
        self.scores.score(j)
    }

    /// Tries to add candidate `j`. On success `j` joins `beta`, leaves the
    /// global pool, and `U_i` is reset to the pool; otherwise `j` only
    /// leaves `U_i`.
    pub fn try_admit(&mut self, scenario: &Scenario, pool: &mut NcvlPool, j: usize) -> bool {
        debug_assert!(self.candidates.contains(j) && pool.contains(j));
        let extended = self.problem.extended(scenario, self.cvl, self.cl, &self.beta, j);
        let feas = check_feasibility(&extended);
        match feas.p_init {
            Some(p) if feas.feasible => {
                self.problem = extended;
                self.p_init = p;
                self.beta.push(j);
                self.scores.admit(&scenario.gains, j);
                pool.remove(j);
                self.reset_candidates(pool);
                true
            }
            _ => {
                self.candidates.remove(j);
                false
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, SimParams};

    #[test]
    fn pool_bookkeeping() {
        let mut pool = NcvlPool::full(4);
        assert!(pool.remove(2));
        assert!(!pool.remove(2));
        assert_eq!(pool.len(), 3);
        assert_eq!(pool.iter().collect::<Vec<_>>(), vec![0, 1, 3]);
    }

    #[test]
    fn admission_and_rejection() {
        let mut params = SimParams::with_size(2, 8);
        params.rng_seed = 3;
        let mut sc = generate_scenario(&params).unwrap();
        let mut pool = NcvlPool::full(8);
        let mut st = ClState::new(&sc, 0, 0, &pool);
        assert!(!st.standalone_infeasible);
        // Generous caps: the first candidate fits.
        sc.params.max_ncvl_power_dbm = 80.0;
        sc.params.max_cvl_power_dbm = 80.0;
        let mut st2 = ClState::new(&sc, 0, 0, &pool);
        let j = st2.best_candidate().unwrap();
        assert!(st2.try_admit(&sc, &mut pool, j));
        assert_eq!(st2.beta, vec![j]);
        assert!(!pool.contains(j) && !st2.candidates.contains(j));
        assert_eq!(st2.candidates, pool);
        // Impossible QoS: rejected, global pool unchanged.
        sc.qos.gamma_d_min = vec![1e12; 8];
        let before = pool.clone();
        st.reset_candidates(&pool);
        let k = st.best_candidate().unwrap();
        assert!(!st.try_admit(&sc, &mut pool, k));
        assert_eq!(pool, before);
        assert!(!st.candidates.contains(k));
        assert!(st.beta.is_empty());
    }
}
