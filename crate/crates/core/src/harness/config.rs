use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{PriorityRule, Registry};
use crate::scenario::SimParams;

/// Straight-line mobility experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityConfig {
    /// Time horizon in seconds.
    pub t_max_s: f64,
    /// Number of snapshots `L`, taken at `k * t_max / L`.
    pub snapshots: usize,
    /// VUE speed in m/s.
    pub speed_mps: f64,
    /// Draw fresh shadowing and fast fading at every snapshot.
    pub redraw_fading: bool,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            t_max_s: 60.0,
            snapshots: 10,
            speed_mps: 10.0,
            redraw_fading: true,
        }
    }
}

/// A Monte-Carlo experiment: every algorithm at every `(n_cvl, density)`
/// point, `trials` channel realizations each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registered scheduler names.
    pub algorithms: Vec<String>,
    /// Numbers of CVLs `N`.
    pub n_cvl: Vec<usize>,
    /// NCVLs per CVL, `M / N`.
    pub density: Vec<usize>,
    pub trials: usize,
    /// Trial `k` uses seed `base_seed ^ k`.
    pub base_seed: u64,
    pub priority_rule: PriorityRule,
    pub mobility: Option<MobilityConfig>,
    /// Cell constants; `n_cvl`, `n_ncvl` and `rng_seed` are overridden per
    /// trial.
    pub sim: SimParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithms: vec!["msera2".into()],
            n_cvl: (6..=16).step_by(2).collect(),
            density: (4..=20).step_by(2).collect(),
            trials: 1000,
            base_seed: 0,
            priority_rule: PriorityRule::default(),
            mobility: None,
            sim: SimParams::default(),
        }
    }
}

/// One `(algorithm, N, M/N)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SweepPoint {
    pub algorithm: String,
    pub n_cvl: usize,
    pub density: usize,
}

impl SweepPoint {
    pub fn new(algorithm: &str, n_cvl: usize, density: usize) -> Self {
        Self {
            algorithm: algorithm.into(),
            n_cvl,
            density,
        }
    }

    pub fn n_ncvl(&self) -> usize {
        self.n_cvl * self.density
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.algorithms.is_empty() || self.n_cvl.is_empty() || self.density.is_empty() {
            return Err(Error::Config("algorithm, n_cvl and density sweeps must be nonempty".into()));
        }
        let registry = Registry::default();
        for name in &self.algorithms {
            registry.get(name)?;
        }
        if let Some(m) = &self.mobility {
            if m.snapshots == 0 || !(m.t_max_s >= 0.0) || !(m.speed_mps >= 0.0) {
                return Err(Error::Config(
                    "mobility needs snapshots >= 1 and non-negative t_max_s and speed_mps".into(),
                ));
            }
        }
        for point in self.points() {
            self.params_for(&point, 0).validate()?;
        }
        Ok(())
    }

    /// Sweep points, algorithm-major, then `N`, then density.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for a in &self.algorithms {
            for &n in &self.n_cvl {
                for &dens in &self.density {
                    out.push(SweepPoint::new(a, n, dens));
                }
            }
        }
        out
    }

    pub fn trial_seed(&self, trial_index: u64) -> u64 {
        self.base_seed ^ trial_index
    }

    /// Cell parameters of one trial at one point.
    pub fn params_for(&self, point: &SweepPoint, trial_index: u64) -> SimParams {
        let mut params = self.sim.clone();
        params.n_cvl = point.n_cvl;
        params.n_ncvl = point.n_ncvl();
        params.rng_seed = self.trial_seed(trial_index);
        if let Some(m) = &self.mobility {
            params.speed_mps = m.speed_mps;
        }
        params
    }
}
