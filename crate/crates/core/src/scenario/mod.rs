//! Cell topologies, channel gains and QoS thresholds.

mod channel;
mod mobility;
mod params;
mod qos;
mod topology;

pub use channel::{path_loss_db, ChannelGains, ChannelModel, FadingDraws, PathLoss};
pub use mobility::{advance_mobility, snapshot_times};
pub use params::SimParams;
pub use qos::{min_sinr_from_rate, QosRequirements};
pub use topology::{uniform_in_disk, Point, Topology};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// One cell realization. Immutable once built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: SimParams,
    pub topology: Topology,
    pub fading: FadingDraws,
    pub gains: ChannelGains,
    pub qos: QosRequirements,
}

/// Draws a topology, QoS thresholds and fading from `params.rng_seed`.
pub fn generate_scenario(params: &SimParams) -> Result<Scenario> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let topology = Topology::sample(params, &mut rng);
    let qos = QosRequirements::sample(params.n_cvl, params.n_ncvl, params.qos_range_db, &mut rng);
    let model = ChannelModel::from_params(params);
    let fading = FadingDraws::sample(&model, params.n_cvl, params.n_ncvl, &mut rng);
    let gains = ChannelGains::compose(&topology, &fading, &model)?;
    Ok(Scenario {
        params: params.clone(),
        topology,
        fading,
        gains,
        qos,
    })
}

impl Scenario {
    /// Assemble a scenario from hand-made parts (tests, external data).
    pub fn from_parts(params: SimParams, topology: Topology, gains: ChannelGains, qos: QosRequirements) -> Self {
        let fading = FadingDraws::unit(gains.n_cvl(), gains.n_ncvl());
        Self { params, topology, fading, gains, qos }
    }

    pub fn n_cvl(&self) -> usize {
        self.gains.n_cvl()
    }

    pub fn n_ncvl(&self) -> usize {
        self.gains.n_ncvl()
    }

    pub fn noise_mw(&self) -> f64 {
        self.params.noise_mw()
    }

    /// Same cell after `dt` seconds of motion. Gains are recomposed from the
    /// new geometry; with `redraw_fading` the shadowing and fast fading are
    /// drawn afresh from `seed`, otherwise the current draws are reused.
    pub fn moved(&self, dt: f64, redraw_fading: Option<u64>) -> Result<Self> {
        let topology = advance_mobility(&self.topology, dt);
        let model = ChannelModel::from_params(&self.params);
        let fading = match redraw_fading {
            Some(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                FadingDraws::sample(&model, self.n_cvl(), self.n_ncvl(), &mut rng)
            }
            None => self.fading.clone(),
        };
        let gains = ChannelGains::compose(&topology, &fading, &model)?;
        Ok(Self {
            params: self.params.clone(),
            topology,
            fading,
            gains,
            qos: self.qos.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let params = SimParams { rng_seed: 77, ..SimParams::with_size(6, 24) };
        let a = generate_scenario(&params).unwrap();
        let b = generate_scenario(&params).unwrap();
        assert_eq!(a.topology, b.topology);
        assert_eq!(a.gains, b.gains);
        assert_eq!(a.qos, b.qos);
        let c = generate_scenario(&SimParams { rng_seed: 78, ..params }).unwrap();
        assert_ne!(a.gains, c.gains);
    }

    #[test]
    fn shapes() {
        let s = generate_scenario(&SimParams::with_size(6, 24)).unwrap();
        assert_eq!(s.gains.n_cvl(), 6);
        assert_eq!(s.gains.n_ncvl(), 24);
        assert_eq!(s.qos.gamma_c_min.len(), 6);
        assert_eq!(s.qos.gamma_d_min.len(), 24);
        assert!(s.gains.all_positive_finite());
        // h_dd slices are 24x24 per CL; the last entry must be addressable.
        let _ = s.gains.h_dd(23, 23, 5);
        let _ = s.gains.h_c(5, 5);
    }

    #[test]
    fn qos_in_range() {
        let s = generate_scenario(&SimParams::with_size(6, 24)).unwrap();
        for g in s.qos.gamma_c_min.iter().chain(&s.qos.gamma_d_min) {
            assert!((1.0..=10.0 + 1e-12).contains(g));
        }
    }

    #[test]
    fn rejects_non_dense() {
        assert!(generate_scenario(&SimParams::with_size(6, 6)).is_err());
    }

    #[test]
    fn frozen_motion_keeps_gains() {
        let params = SimParams { speed_mps: 0.0, ..SimParams::with_size(3, 12) };
        let s = generate_scenario(&params).unwrap();
        let moved = s.moved(6.0, None).unwrap();
        assert_eq!(moved.gains, s.gains);
    }
}
