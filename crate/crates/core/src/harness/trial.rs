use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{ExperimentConfig, SweepPoint};
use crate::error::Result;
use crate::matching::{check_feasibility, Allocation, Registry, ScheduleOptions};
use crate::power::{LinkModel, MamiStatus};
use crate::scenario::{generate_scenario, Scenario};

/// Outcome of one CL group in one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDetail {
    pub cvl: usize,
    pub cl: usize,
    pub ncvls: Vec<usize>,
    pub powers_mw: Vec<f64>,
    pub sum_rate: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub status: MamiStatus,
    pub standalone_infeasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    /// Sum of the spectral efficiencies of every CVL and admitted NCVL.
    pub sum_rate: f64,
    /// `sum_rate / (N + admitted_count)`.
    pub average_rate: f64,
    pub admitted_count: usize,
    /// Matching plus power allocation, excluding scenario generation.
    pub wall_time_s: f64,
    /// Per CVL, in CVL index order.
    pub groups: Vec<GroupDetail>,
}

impl TrialResult {
    pub fn from_allocation(allocation: &Allocation, wall_time_s: f64) -> Self {
        let matching = &allocation.matching;
        let groups: Vec<GroupDetail> = allocation
            .power
            .groups
            .iter()
            .enumerate()
            .map(|(i, g)| GroupDetail {
                cvl: i,
                cl: matching.priority.cl_of_cvl[i],
                ncvls: matching.beta[i].clone(),
                powers_mw: g.p.clone(),
                sum_rate: g.sum_rate(),
                iterations: g.iterations,
                kkt_residual: g.kkt_residual,
                status: g.status,
                standalone_infeasible: matching.standalone_infeasible[i],
            })
            .collect();
        let sum_rate = allocation.sum_rate();
        let admitted_count = matching.n_admitted();
        Self {
            sum_rate,
            average_rate: sum_rate / (groups.len() + admitted_count) as f64,
            admitted_count,
            wall_time_s,
            groups,
        }
    }
}

/// Scheduler randomness is drawn from its own stream of the trial seed so
/// that every algorithm sees the same cell for the same trial index.
pub fn scheduler_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Runs `scheduler` on `scenario`, timing matching and power allocation.
pub fn schedule_timed(
    registry: &Registry,
    algorithm: &str,
    scenario: &Scenario,
    opts: &ScheduleOptions,
    seed: u64,
) -> Result<(Allocation, f64)> {
    let scheduler = registry.get(algorithm)?;
    let mut rng = scheduler_rng(seed);
    let start = Instant::now();
    let allocation = scheduler.schedule(scenario, opts, &mut rng);
    Ok((allocation, start.elapsed().as_secs_f64()))
}

pub fn schedule_options(config: &ExperimentConfig) -> ScheduleOptions {
    ScheduleOptions {
        priority_rule: config.priority_rule,
        ..ScheduleOptions::default()
    }
}

/// One channel realization at `point`, seeded with `base_seed ^ trial_index`.
pub fn run_trial(config: &ExperimentConfig, point: &SweepPoint, trial_index: u64) -> Result<TrialResult> {
    let scenario = generate_scenario(&config.params_for(point, trial_index))?;
    let (allocation, wall) = schedule_timed(
        &Registry::default(),
        &point.algorithm,
        &scenario,
        &schedule_options(config),
        config.trial_seed(trial_index),
    )?;
    Ok(TrialResult::from_allocation(&allocation, wall))
}

/// Relative QoS slack below which a constraint counts as violated.
pub const QOS_TOL: f64 = 1e-6;

/// Invariant violations of a finished allocation: inconsistent matching,
/// admitted groups that fail the feasibility test or miss a QoS target at
/// the final powers, powers outside the box.
pub fn allocation_violations(scenario: &Scenario, allocation: &Allocation) -> Vec<String> {
    let matching = &allocation.matching;
    let mut out = Vec::new();
    if !matching.is_consistent() {
        out.push("matching assigns an NCVL twice or disagrees with its admitted flags".into());
    }
    for (i, group) in allocation.power.groups.iter().enumerate() {
        let problem = matching.problem(scenario, i);
        for (r, (&p, &cap)) in group.p.iter().zip(&problem.p_max_vec).enumerate() {
            if !(p >= 0.0 && p <= cap * (1.0 + QOS_TOL)) {
                out.push(format!("CVL {i}: link {r} power {p} outside [0, {cap}]"));
            }
        }
        if matching.beta[i].is_empty() {
            continue;
        }
        if !check_feasibility(&problem).feasible {
            out.push(format!("CVL {i}: admitted group fails the feasibility test"));
            continue;
        }
        let model = LinkModel::new(&problem);
        for (r, (sinr, gamma)) in model.sinrs(&group.p).iter().zip(&problem.gamma_vec).enumerate() {
            if *sinr < gamma * (1.0 - QOS_TOL) {
                out.push(format!("CVL {i}: link {r} SINR {sinr} below target {gamma}"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            algorithms: vec!["msera2".into()],
            n_cvl: vec![3],
            density: vec![4],
            trials: 2,
            base_seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_per_index() {
        let c = small_config();
        let p = &c.points()[0];
        let a = run_trial(&c, p, 1).unwrap();
        let b = run_trial(&c, p, 1).unwrap();
        assert_eq!(a.sum_rate.to_bits(), b.sum_rate.to_bits());
        assert_eq!(a.groups, b.groups);
    }

    #[test]
    fn metrics_are_consistent() {
        let c = small_config();
        for algorithm in ["msera1", "msera2", "random_cvl", "random_ncvl"] {
            let p = SweepPoint::new(algorithm, 3, 4);
            let r = run_trial(&c, &p, 0).unwrap();
            assert!(r.admitted_count <= p.n_ncvl());
            let total = r.average_rate * (3 + r.admitted_count) as f64;
            assert!((total - r.sum_rate).abs() <= 1e-9 * r.sum_rate.max(1.0));
            let groups: f64 = r.groups.iter().map(|g| g.sum_rate).sum();
            assert!((groups - r.sum_rate).abs() <= 1e-9 * r.sum_rate.max(1.0));
        }
    }

    #[test]
    fn impossible_ncvl_qos_leaves_cvl_only_rate() {
        let mut c = small_config();
        // A 200 dB SINR target is out of reach for every NCVL; CVLs keep
        // their usual targets.
        c.sim.qos_range_db = [200.0, 200.0];
        let p = &c.points()[0];
        let mut params = c.params_for(p, 0);
        let mut scenario = generate_scenario(&params).unwrap();
        scenario.qos.gamma_c_min.iter_mut().for_each(|g| *g = 1.0);
        let (alloc, _) =
            schedule_timed(&Registry::default(), "msera2", &scenario, &schedule_options(&c), 0).unwrap();
        assert_eq!(alloc.matching.n_admitted(), 0);
        params.n_ncvl = 0;
        let expected: f64 = (0..3)
            .map(|i| {
                let cl = alloc.matching.priority.cl_of_cvl[i];
                let snr = params.max_cvl_power_mw() * scenario.gains.h_c(i, cl) / params.noise_mw();
                (1.0 + snr).log2()
            })
            .sum();
        assert!((alloc.sum_rate() - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn allocations_satisfy_invariants() {
        let c = small_config();
        for algorithm in ["msera1", "msera2", "random_cvl", "random_ncvl"] {
            let p = SweepPoint::new(algorithm, 3, 6);
            let scenario = generate_scenario(&c.params_for(&p, 4)).unwrap();
            let (alloc, _) =
                schedule_timed(&Registry::default(), algorithm, &scenario, &schedule_options(&c), 4).unwrap();
            assert_eq!(allocation_violations(&scenario, &alloc), Vec::<String>::new());
        }
    }
}
