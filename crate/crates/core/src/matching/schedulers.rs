use rand::seq::SliceRandom;
use rand::RngCore;

use super::admission::{ClState, NcvlPool};
use super::priority::{assign_cvl_priority, random_cvl_priority, PriorityOrder, PriorityRule};
use super::problem::PerClProblem;
use crate::error::{Error, Result};
use crate::power::{optimize_group, MamiOptions, PowerAllocation};
use crate::scenario::Scenario;

/// NCVL-to-CL matching of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub priority: PriorityOrder,
    /// `beta[i]`: NCVLs sharing the CL of CVL `i`, in admission order.
    pub beta: Vec<Vec<usize>>,
    /// `admitted[j]`: NCVL `j` shares some CL.
    pub admitted: Vec<bool>,
    /// `standalone_infeasible[i]`: CVL `i` misses its QoS even alone.
    pub standalone_infeasible: Vec<bool>,
}

impl Matching {
    pub fn n_admitted(&self) -> usize {
        self.beta.iter().map(Vec::len).sum()
    }

    /// `psi[i][j] == 1` iff NCVL `j` is in `beta[i]`.
    pub fn psi(&self) -> Vec<Vec<u8>> {
        self.beta
            .iter()
            .map(|b| {
                let mut row = vec![0u8; self.admitted.len()];
                for &j in b {
                    row[j] = 1;
                }
                row
            })
            .collect()
    }

    /// Every NCVL in at most one group, and `admitted` agrees with `beta`.
    pub fn is_consistent(&self) -> bool {
        let mut seen = vec![false; self.admitted.len()];
        for &j in self.beta.iter().flatten() {
            if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                return false;
            }
        }
        seen == self.admitted
    }

    pub fn problem(&self, scenario: &Scenario, cvl: usize) -> PerClProblem {
        PerClProblem::for_group(scenario, cvl, self.priority.cl_of_cvl[cvl], &self.beta[cvl])
    }

    fn from_states(priority: PriorityOrder, states: Vec<ClState>, m: usize) -> Self {
        let n = priority.n();
        let mut beta = vec![Vec::new(); n];
        let mut standalone_infeasible = vec![false; n];
        let mut admitted = vec![false; m];
        for st in states {
            for &j in &st.beta {
                admitted[j] = true;
            }
            standalone_infeasible[st.cvl] = st.standalone_infeasible;
            beta[st.cvl] = st.beta;
        }
        Self {
            priority,
            beta,
            admitted,
            standalone_infeasible,
        }
    }
}

/// Matching plus per-CL powers; `power.groups[i]` belongs to CVL `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub matching: Matching,
    pub power: PowerAllocation,
}

impl Allocation {
    pub fn sum_rate(&self) -> f64 {
        self.power.sum_rate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScheduleOptions {
    pub priority_rule: PriorityRule,
    pub mami: MamiOptions,
}

/// A named matching strategy.
pub trait Scheduler: Send + Sync {
    fn name(&self) -> &str;

    fn matching(&self, scenario: &Scenario, opts: &ScheduleOptions, rng: &mut dyn RngCore) -> Matching;

    fn schedule(&self, scenario: &Scenario, opts: &ScheduleOptions, rng: &mut dyn RngCore) -> Allocation {
        let matching = self.matching(scenario, opts, rng);
        let power = allocate_powers(scenario, &matching, &opts.mami);
        Allocation { matching, power }
    }
}

/// Optimizes the powers of every group of a matching.
pub fn allocate_powers(scenario: &Scenario, matching: &Matching, opts: &MamiOptions) -> PowerAllocation {
    let groups = (0..matching.beta.len())
        .map(|i| optimize_group(&matching.problem(scenario, i), opts).expect("generated gains are valid"))
        .collect();
    PowerAllocation { groups }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissionOrder {
    /// Each CVL in turn takes every NCVL it can.
    Serial,
    /// Rounds of at most one admission per CVL.
    RoundRobin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrioritySource {
    ChannelGain,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateChoice {
    MinMax,
    Random,
}

/// Matching scheduler family covering both composite algorithms and the
/// random baselines.
#[derive(Debug, Clone)]
pub struct Msera {
    pub name: String,
    pub order: AdmissionOrder,
    pub priority: PrioritySource,
    pub choice: CandidateChoice,
}

impl Msera {
    pub fn new(name: &str, order: AdmissionOrder, priority: PrioritySource, choice: CandidateChoice) -> Self {
        Self {
            name: name.to_string(),
            order,
            priority,
            choice,
        }
    }

    fn pick(&self, st: &ClState, rng: &mut dyn RngCore) -> Option<usize> {
        match self.choice {
            CandidateChoice::MinMax => st.best_candidate(),
            CandidateChoice::Random => {
                let members: Vec<usize> = st.candidates.iter().collect();
                members.choose(rng).copied()
            }
        }
    }

    /// Selects and tests candidates for one CL until one is admitted or
    /// `U_i` runs dry. Returns whether an NCVL was admitted.
    fn admit_one(&self, st: &mut ClState, scenario: &Scenario, pool: &mut NcvlPool, rng: &mut dyn RngCore) -> bool {
        while let Some(j) = self.pick(st, rng) {
            if st.try_admit(scenario, pool, j) {
                return true;
            }
        }
        false
    }
}

impl Scheduler for Msera {
    fn name(&self) -> &str {
        &self.name
    }

    fn matching(&self, scenario: &Scenario, opts: &ScheduleOptions, rng: &mut dyn RngCore) -> Matching {
        let priority = match self.priority {
            PrioritySource::ChannelGain => assign_cvl_priority(&scenario.gains, opts.priority_rule),
            PrioritySource::Random => random_cvl_priority(&scenario.gains, rng),
        };
        let mut pool = NcvlPool::full(scenario.n_ncvl());
        let mut states: Vec<ClState> = priority
            .alpha
            .iter()
            .map(|&i| ClState::new(scenario, i, priority.cl_of_cvl[i], &pool))
            .collect();
        match self.order {
            AdmissionOrder::Serial => {
                for st in states.iter_mut().filter(|s| !s.standalone_infeasible) {
                    st.reset_candidates(&pool);
                    while self.admit_one(st, scenario, &mut pool, rng) {}
                }
            }
            AdmissionOrder::RoundRobin => {
                let mut done: Vec<bool> = states.iter().map(|s| s.standalone_infeasible).collect();
                while !pool.is_empty() && done.iter().any(|d| !d) {
                    for (st, done) in states.iter_mut().zip(done.iter_mut()) {
                        if *done {
                            continue;
                        }
                        st.reset_candidates(&pool);
                        if !self.admit_one(st, scenario, &mut pool, rng) {
                            *done = true;
                        }
                    }
                }
            }
        }
        Matching::from_states(priority, states, scenario.n_ncvl())
    }
}

/// Schedulers selectable by name.
pub struct Registry {
    entries: Vec<Box<dyn Scheduler>>,
}

impl Default for Registry {
    fn default() -> Self {
        use AdmissionOrder::*;
        let mut reg = Self { entries: Vec::new() };
        reg.register(Box::new(Msera::new("msera1", Serial, PrioritySource::ChannelGain, CandidateChoice::MinMax)));
        reg.register(Box::new(Msera::new("msera2", RoundRobin, PrioritySource::ChannelGain, CandidateChoice::MinMax)));
        reg.register(Box::new(Msera::new("random_cvl", RoundRobin, PrioritySource::Random, CandidateChoice::MinMax)));
        reg.register(Box::new(Msera::new("random_ncvl", RoundRobin, PrioritySource::ChannelGain, CandidateChoice::Random)));
        reg
    }
}

impl Registry {
    /// Adds a scheduler, replacing any with the same name.
    pub fn register(&mut self, scheduler: Box<dyn Scheduler>) {
        self.entries.retain(|s| s.name() != scheduler.name());
        self.entries.push(scheduler);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Scheduler> {
        self.entries
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|s| s.name()).collect()
    }
}

fn run_named(name: &str, scenario: &Scenario, opts: &ScheduleOptions, rng: &mut dyn RngCore) -> Allocation {
    Registry::default().get(name).expect("builtin scheduler").schedule(scenario, opts, rng)
}

/// Serial admission: each CVL, in priority order, admits NCVLs until none fits.
pub fn msera_one(scenario: &Scenario, opts: &ScheduleOptions) -> Allocation {
    run_named("msera1", scenario, opts, &mut rand::rngs::mock::StepRng::new(0, 0))
}

/// Round-robin admission: one NCVL per CVL per round.
pub fn msera_two(scenario: &Scenario, opts: &ScheduleOptions) -> Allocation {
    run_named("msera2", scenario, opts, &mut rand::rngs::mock::StepRng::new(0, 0))
}

pub fn random_cvl_baseline(scenario: &Scenario, opts: &ScheduleOptions, rng: &mut dyn RngCore) -> Allocation {
    run_named("random_cvl", scenario, opts, rng)
}

pub fn random_ncvl_baseline(scenario: &Scenario, opts: &ScheduleOptions, rng: &mut dyn RngCore) -> Allocation {
    run_named("random_ncvl", scenario, opts, rng)
}
