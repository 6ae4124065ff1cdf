use rand::Rng;

use crate::error::{Error, Result};
use crate::units::db_to_linear;

/// `2^r - 1`: the SINR needed to reach spectral efficiency `r` bits/s/Hz.
pub fn min_sinr_from_rate(r_min: f64) -> Result<f64> {
    if !(r_min >= 0.0) || !r_min.is_finite() {
        return Err(Error::Domain(format!("rate must be a finite value >= 0, got {r_min}")));
    }
    Ok(r_min.exp2() - 1.0)
}

/// Linear minimum-SINR thresholds for every CVL and NCVL.
#[derive(Debug, Clone, PartialEq)]
pub struct QosRequirements {
    pub gamma_c_min: Vec<f64>,
    pub gamma_d_min: Vec<f64>,
}

impl QosRequirements {
    pub fn from_rates(rates_c: &[f64], rates_d: &[f64]) -> Result<Self> {
        Ok(Self {
            gamma_c_min: rates_c.iter().map(|&r| min_sinr_from_rate(r)).collect::<Result<_>>()?,
            gamma_d_min: rates_d.iter().map(|&r| min_sinr_from_rate(r)).collect::<Result<_>>()?,
        })
    }

    /// Thresholds drawn uniformly in dB over `range_db`.
    pub fn sample<R: Rng + ?Sized>(n_cvl: usize, n_ncvl: usize, range_db: [f64; 2], rng: &mut R) -> Self {
        let mut draw = |k: usize| -> Vec<f64> {
            (0..k).map(|_| db_to_linear(rng.gen_range(range_db[0]..=range_db[1]))).collect()
        };
        let gamma_c_min = draw(n_cvl);
        let gamma_d_min = draw(n_ncvl);
        Self { gamma_c_min, gamma_d_min }
    }

    pub fn rate_c_min(&self, i: usize) -> f64 {
        self.gamma_c_min[i].ln_1p() / std::f64::consts::LN_2
    }

    pub fn rate_d_min(&self, j: usize) -> f64 {
        self.gamma_d_min[j].ln_1p() / std::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinr_from_rate() {
        assert_eq!(min_sinr_from_rate(0.0).unwrap(), 0.0);
        assert_eq!(min_sinr_from_rate(1.0).unwrap(), 1.0);
        let r = 11f64.log2();
        assert!((r - 3.459_431_618_637_297).abs() < 1e-12);
        assert!((min_sinr_from_rate(r).unwrap() - 10.0).abs() < 1e-12);
        assert!(min_sinr_from_rate(-0.1).is_err());
    }

    #[test]
    fn rates_round_trip() {
        let q = QosRequirements::from_rates(&[0.5, 2.0], &[1.0]).unwrap();
        assert!((q.rate_c_min(0) - 0.5).abs() < 1e-12);
        assert!((q.rate_c_min(1) - 2.0).abs() < 1e-12);
        assert!((q.rate_d_min(0) - 1.0).abs() < 1e-12);
    }
}
