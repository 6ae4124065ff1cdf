use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, MobilityConfig, SweepPoint};
use super::sweep::mean_std;
use super::trial::{schedule_options, schedule_timed};
use crate::error::{Error, Result};
use crate::matching::Registry;
use crate::scenario::{generate_scenario, snapshot_times};

pub const MOBILITY_COLUMNS: [&str; 9] = [
    "algorithm",
    "n_cvl",
    "density",
    "snapshot",
    "time_s",
    "trials",
    "mean_sum_rate",
    "std_sum_rate",
    "mean_admitted",
];

/// Metrics of one snapshot of one sweep point, over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityRow {
    pub algorithm: String,
    pub n_cvl: usize,
    pub density: usize,
    pub snapshot: usize,
    pub time_s: f64,
    pub trials: usize,
    pub mean_sum_rate: f64,
    pub std_sum_rate: f64,
    pub mean_admitted: f64,
}

/// Sum rates and admission counts of one trial at every snapshot.
fn mobility_trial(
    config: &ExperimentConfig,
    mobility: &MobilityConfig,
    point: &SweepPoint,
    trial_index: u64,
) -> Result<Vec<(f64, usize)>> {
    let registry = Registry::default();
    let opts = schedule_options(config);
    let seed = config.trial_seed(trial_index);
    let base = generate_scenario(&config.params_for(point, trial_index))?;
    snapshot_times(mobility.t_max_s, mobility.snapshots)
        .into_iter()
        .enumerate()
        .map(|(k, t)| {
            let redraw = (mobility.redraw_fading && k > 0).then(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(2 + k as u64);
                rng.next_u64()
            });
            let scenario = base.moved(t, redraw)?;
            // The scheduler stream is fixed per trial, so a frozen cell gives
            // the same allocation at every snapshot.
            let (alloc, _) = schedule_timed(&registry, &point.algorithm, &scenario, &opts, seed)?;
            Ok((alloc.sum_rate(), alloc.matching.n_admitted()))
        })
        .collect()
}

/// Re-draws the cell at `k * t_max / L` as the VUEs move and re-runs the
/// allocation; one row per (point, snapshot).
pub fn run_mobility(config: &ExperimentConfig) -> Result<Vec<MobilityRow>> {
    config.validate()?;
    let mobility = config
        .mobility
        .clone()
        .ok_or_else(|| Error::Config("mobility section missing".into()))?;
    let points = config.points();
    let per = config.trials;
    let slots: Vec<Result<Vec<(f64, usize)>>> = (0..points.len() * per)
        .into_par_iter()
        .map(|k| mobility_trial(config, &mobility, &points[k / per], (k % per) as u64))
        .collect();
    let slots = slots.into_iter().collect::<Result<Vec<_>>>()?;
    let times = snapshot_times(mobility.t_max_s, mobility.snapshots);
    let mut rows = Vec::new();
    for (p, point) in points.iter().enumerate() {
        let trials = &slots[p * per..(p + 1) * per];
        for (k, &time_s) in times.iter().enumerate() {
            let rates: Vec<f64> = trials.iter().map(|t| t[k].0).collect();
            let admitted: Vec<f64> = trials.iter().map(|t| t[k].1 as f64).collect();
            let (mean_sum_rate, std_sum_rate) = mean_std(&rates);
            rows.push(MobilityRow {
                algorithm: point.algorithm.clone(),
                n_cvl: point.n_cvl,
                density: point.density,
                snapshot: k,
                time_s,
                trials: per,
                mean_sum_rate,
                std_sum_rate,
                mean_admitted: mean_std(&admitted).0,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(mobility: MobilityConfig) -> ExperimentConfig {
        ExperimentConfig {
            algorithms: vec!["random_ncvl".into()],
            n_cvl: vec![2],
            density: vec![4],
            trials: 2,
            base_seed: 21,
            mobility: Some(mobility),
            ..Default::default()
        }
    }

    #[test]
    fn one_row_per_snapshot() {
        let rows = run_mobility(&config(MobilityConfig {
            snapshots: 5,
            ..Default::default()
        }))
        .unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows.iter().map(|r| r.snapshot).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
        assert_eq!(rows[1].time_s, 12.0);
    }

    #[test]
    fn frozen_cell_has_constant_rate() {
        let rows = run_mobility(&config(MobilityConfig {
            snapshots: 4,
            speed_mps: 0.0,
            redraw_fading: false,
            ..Default::default()
        }))
        .unwrap();
        assert!(rows.iter().all(|r| r.mean_sum_rate == rows[0].mean_sum_rate));
    }

    #[test]
    fn missing_section_is_an_error() {
        let mut c = config(MobilityConfig::default());
        c.mobility = None;
        assert!(run_mobility(&c).is_err());
    }
}
