use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SweepPoint};
use super::trial::{run_trial, TrialResult};
use crate::error::Result;

/// Sample mean and standard deviation (`n - 1` denominator, 0 for one
/// sample).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregated metrics of one sweep point; one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: String,
    pub n_cvl: usize,
    pub density: usize,
    pub trials: usize,
    pub mean_sum_rate: f64,
    pub std_sum_rate: f64,
    pub mean_avg_rate: f64,
    pub mean_admitted: f64,
    pub mean_runtime_s: f64,
}

impl SweepRow {
    pub fn aggregate(point: &SweepPoint, trials: &[TrialResult]) -> Self {
        let collect = |f: fn(&TrialResult) -> f64| trials.iter().map(f).collect::<Vec<_>>();
        let (mean_sum_rate, std_sum_rate) = mean_std(&collect(|t| t.sum_rate));
        Self {
            algorithm: point.algorithm.clone(),
            n_cvl: point.n_cvl,
            density: point.density,
            trials: trials.len(),
            mean_sum_rate,
            std_sum_rate,
            mean_avg_rate: mean_std(&collect(|t| t.average_rate)).0,
            mean_admitted: mean_std(&collect(|t| t.admitted_count as f64)).0,
            mean_runtime_s: mean_std(&collect(|t| t.wall_time_s)).0,
        }
    }

    /// Standard error of the mean sum rate.
    pub fn sem_sum_rate(&self) -> f64 {
        self.std_sum_rate / (self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn find(&self, algorithm: &str, n_cvl: usize, density: usize) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.n_cvl == n_cvl && r.density == density)
    }
}

/// Every trial of every point. Trials run on the rayon pool and land in
/// slots indexed by `(point, trial)`, so the result does not depend on the
/// thread count.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<(SweepPoint, Vec<TrialResult>)>> {
    config.validate()?;
    let points = config.points();
    let per = config.trials;
    let slots: Vec<Result<TrialResult>> = (0..points.len() * per)
        .into_par_iter()
        .map(|k| run_trial(config, &points[k / per], (k % per) as u64))
        .collect();
    let mut slots = slots.into_iter();
    let mut out = Vec::with_capacity(points.len());
    for point in points {
        let trials = slots.by_ref().take(per).collect::<Result<Vec<_>>>()?;
        out.push((point, trials));
    }
    Ok(out)
}

/// Mean and spread of every metric at every sweep point.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepTable> {
    let rows = run_trials(config)?
        .iter()
        .map(|(point, trials)| SweepRow::aggregate(point, trials))
        .collect();
    Ok(SweepTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_trial_row_equals_trial() {
        let config = ExperimentConfig {
            algorithms: vec!["random_cvl".into()],
            n_cvl: vec![2],
            density: vec![4],
            trials: 1,
            base_seed: 3,
            ..Default::default()
        };
        let table = run_sweep(&config).unwrap();
        assert_eq!(table.rows.len(), 1);
        let row = &table.rows[0];
        let trial = run_trial(&config, &config.points()[0], 0).unwrap();
        assert_eq!(row.mean_sum_rate, trial.sum_rate);
        assert_eq!(row.std_sum_rate, 0.0);
        assert_eq!(row.mean_avg_rate, trial.average_rate);
        assert_eq!(row.mean_admitted, trial.admitted_count as f64);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let config = ExperimentConfig {
            algorithms: vec!["msera2".into(), "random_ncvl".into()],
            n_cvl: vec![2, 3],
            density: vec![4],
            trials: 3,
            base_seed: 8,
            ..Default::default()
        };
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| run_sweep(&config).unwrap())
        };
        let strip = |t: SweepTable| {
            t.rows
                .into_iter()
                .map(|r| SweepRow { mean_runtime_s: 0.0, ..r })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(run(1)), strip(run(3)));
    }
}
