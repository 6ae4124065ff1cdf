use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::dbm_to_mw;

/// Physical and experiment constants for one cell.
///
/// Defaults follow the reference simulation setup: a 400 m cell, −114 dBm
/// noise, the `15.3 + 37.6 log10(D)` path-loss law, 24/21 dBm power caps,
/// 8 dB shadowing, QoS SINR thresholds uniform in [0, 10] dB and NCVL
/// clusters of radius uniform in [10, 40] m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub cell_radius_m: f64,
    pub noise_power_dbm: f64,
    pub pathloss_const_db: f64,
    /// dB per decade of distance.
    pub pathloss_exp_coeff: f64,
    pub max_cvl_power_dbm: f64,
    pub max_ncvl_power_dbm: f64,
    pub shadowing_std_db: f64,
    /// Minimum SINR requirement range in dB, sampled uniformly.
    pub qos_range_db: [f64; 2],
    pub cluster_radius_range_m: [f64; 2],
    pub n_cvl: usize,
    pub n_ncvl: usize,
    pub rng_seed: u64,
    /// Place every NCVL transmitter on its anchor VUE instead of sampling it
    /// independently in the cell.
    pub collocate_ncvl_tx: bool,
    /// VUE speed for the mobility experiment, m/s.
    pub speed_mps: f64,
    /// Link distances are clamped from below to this value before the
    /// path-loss law is applied.
    pub min_distance_m: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            cell_radius_m: 400.0,
            noise_power_dbm: -114.0,
            pathloss_const_db: 15.3,
            pathloss_exp_coeff: 37.6,
            max_cvl_power_dbm: 24.0,
            max_ncvl_power_dbm: 21.0,
            shadowing_std_db: 8.0,
            qos_range_db: [0.0, 10.0],
            cluster_radius_range_m: [10.0, 40.0],
            n_cvl: 10,
            n_ncvl: 200,
            rng_seed: 0,
            collocate_ncvl_tx: false,
            speed_mps: 10.0,
            min_distance_m: 1.0,
        }
    }
}

impl SimParams {
    pub fn with_size(n_cvl: usize, n_ncvl: usize) -> Self {
        Self {
            n_cvl,
            n_ncvl,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("cell_radius_m", self.cell_radius_m),
            ("noise_power_dbm", self.noise_power_dbm),
            ("pathloss_const_db", self.pathloss_const_db),
            ("pathloss_exp_coeff", self.pathloss_exp_coeff),
            ("max_cvl_power_dbm", self.max_cvl_power_dbm),
            ("max_ncvl_power_dbm", self.max_ncvl_power_dbm),
            ("shadowing_std_db", self.shadowing_std_db),
            ("qos_range_db[0]", self.qos_range_db[0]),
            ("qos_range_db[1]", self.qos_range_db[1]),
            ("cluster_radius_range_m[0]", self.cluster_radius_range_m[0]),
            ("cluster_radius_range_m[1]", self.cluster_radius_range_m[1]),
            ("speed_mps", self.speed_mps),
            ("min_distance_m", self.min_distance_m),
        ];
        if let Some((name, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} is not finite ({v})")));
        }
        if self.cell_radius_m <= 0.0 {
            return Err(Error::InvalidParams("cell_radius_m must be > 0".into()));
        }
        if self.n_cvl == 0 {
            return Err(Error::InvalidParams("n_cvl must be >= 1".into()));
        }
        if self.n_ncvl <= self.n_cvl {
            return Err(Error::InvalidParams(format!(
                "dense cell requires n_ncvl > n_cvl (got M={}, N={})",
                self.n_ncvl, self.n_cvl
            )));
        }
        if self.shadowing_std_db < 0.0 || self.speed_mps < 0.0 || self.min_distance_m <= 0.0 {
            return Err(Error::InvalidParams(
                "shadowing_std_db, speed_mps must be >= 0 and min_distance_m > 0".into(),
            ));
        }
        let [q0, q1] = self.qos_range_db;
        let [c0, c1] = self.cluster_radius_range_m;
        if q0 > q1 || c0 > c1 || c0 < 0.0 {
            return Err(Error::InvalidParams("empty or negative range".into()));
        }
        Ok(())
    }

    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(self.noise_power_dbm)
    }

    pub fn max_cvl_power_mw(&self) -> f64 {
        dbm_to_mw(self.max_cvl_power_dbm)
    }

    pub fn max_ncvl_power_mw(&self) -> f64 {
        dbm_to_mw(self.max_ncvl_power_dbm)
    }
}
