use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SweepPoint};
use super::trial::{schedule_options, schedule_timed};
use crate::error::Result;
use crate::matching::Registry;
use crate::scenario::generate_scenario;

pub const TRACE_COLUMNS: [&str; 6] = ["cvl", "cl", "links", "iteration", "sum_rate", "step"];

/// One outer iteration of the power allocation of one CL. Iteration 0 is the
/// minimum-power start and has no step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub cvl: usize,
    pub cl: usize,
    pub links: usize,
    pub iteration: usize,
    pub sum_rate: f64,
    pub step: Option<f64>,
}

/// Objective series of every CL group in one trial.
pub fn run_trace(config: &ExperimentConfig, point: &SweepPoint, trial_index: u64) -> Result<Vec<TraceRow>> {
    let scenario = generate_scenario(&config.params_for(point, trial_index))?;
    let (alloc, _) = schedule_timed(
        &Registry::default(),
        &point.algorithm,
        &scenario,
        &schedule_options(config),
        config.trial_seed(trial_index),
    )?;
    let mut rows = Vec::new();
    for (i, group) in alloc.power.groups.iter().enumerate() {
        for (k, &sum_rate) in group.objective_trace.iter().enumerate() {
            rows.push(TraceRow {
                cvl: i,
                cl: alloc.matching.priority.cl_of_cvl[i],
                links: group.p.len(),
                iteration: k,
                sum_rate,
                step: k.checked_sub(1).map(|s| group.step_trace[s]),
            });
        }
    }
    Ok(rows)
}

/// CVLs whose series ever drops by more than `tol`.
pub fn decreasing_series(rows: &[TraceRow], tol: f64) -> Vec<usize> {
    let mut bad: Vec<usize> = rows
        .windows(2)
        .filter(|w| w[0].cvl == w[1].cvl && w[1].sum_rate < w[0].sum_rate - tol)
        .map(|w| w[1].cvl)
        .collect();
    bad.dedup();
    bad
}
