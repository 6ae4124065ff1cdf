use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::params::SimParams;
use super::topology::Topology;
use crate::error::{Error, Result};
use crate::units::db_to_linear;

/// Distance-based path loss, `const + coeff * log10(d)` in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub const_db: f64,
    pub coeff_db_per_decade: f64,
}

impl PathLoss {
    pub fn from_params(p: &SimParams) -> Self {
        Self {
            const_db: p.pathloss_const_db,
            coeff_db_per_decade: p.pathloss_exp_coeff,
        }
    }

    pub fn loss_db(&self, distance_m: f64) -> Result<f64> {
        if !(distance_m > 0.0) || !distance_m.is_finite() {
            return Err(Error::Domain(format!(
                "path loss needs a positive distance, got {distance_m}"
            )));
        }
        Ok(self.const_db + self.coeff_db_per_decade * distance_m.log10())
    }

    /// Linear gain `K * d^-rho`.
    pub fn gain(&self, distance_m: f64) -> Result<f64> {
        Ok(db_to_linear(-self.loss_db(distance_m)?))
    }
}

impl Default for PathLoss {
    fn default() -> Self {
        Self::from_params(&SimParams::default())
    }
}

/// `15.3 + 37.6 log10(d)` with the default constants.
pub fn path_loss_db(distance_m: f64) -> Result<f64> {
    PathLoss::default().loss_db(distance_m)
}

/// Path loss plus log-normal shadowing (0 dB median) and unit-mean
/// exponential fast fading.
#[derive(Debug, Clone, Copy)]
pub struct ChannelModel {
    pub path_loss: PathLoss,
    pub shadowing_std_db: f64,
    pub min_distance_m: f64,
}

impl ChannelModel {
    pub fn from_params(p: &SimParams) -> Self {
        Self {
            path_loss: PathLoss::from_params(p),
            shadowing_std_db: p.shadowing_std_db,
            min_distance_m: p.min_distance_m,
        }
    }

    pub fn sample_shadowing<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        db_to_linear(self.shadowing_std_db * z)
    }

    pub fn sample_fast_fading<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = Exp1.sample(rng);
        // Exp1 may return exactly 0.0; zero gains are not allowed.
        e.max(f64::MIN_POSITIVE)
    }

    /// Deterministic part of the gain for a link of the given length.
    pub fn path_gain(&self, distance_m: f64) -> Result<f64> {
        self.path_loss.gain(distance_m.max(self.min_distance_m))
    }

    /// `K * zeta * eta * d^-rho`.
    pub fn sample_channel_gain<R: Rng + ?Sized>(&self, distance_m: f64, rng: &mut R) -> Result<f64> {
        if !(distance_m > 0.0) {
            return Err(Error::Domain(format!(
                "channel gain needs a positive distance, got {distance_m}"
            )));
        }
        let zeta = self.sample_shadowing(rng);
        let eta = self.sample_fast_fading(rng);
        Ok(self.path_gain(distance_m)? * zeta * eta)
    }
}

/// Random multiplicative factors (shadowing times fast fading) for every
/// link and CL, laid out like [`ChannelGains`]. Shadowing is drawn once per
/// link and shared by all CLs; fast fading is drawn per (link, CL).
#[derive(Debug, Clone, PartialEq)]
pub struct FadingDraws {
    n_cvl: usize,
    n_ncvl: usize,
    c: Vec<f64>,
    db: Vec<f64>,
    d: Vec<f64>,
    cd: Vec<f64>,
    dd: Vec<f64>,
}

impl FadingDraws {
    pub fn sample<R: Rng + ?Sized>(model: &ChannelModel, n_cvl: usize, n_ncvl: usize, rng: &mut R) -> Self {
        let n_cl = n_cvl;
        let mut block = |links: usize| {
            let mut out = Vec::with_capacity(links * n_cl);
            for _ in 0..links {
                let zeta = model.sample_shadowing(rng);
                for _ in 0..n_cl {
                    out.push(zeta * model.sample_fast_fading(rng));
                }
            }
            out
        };
        let c = block(n_cvl);
        let db = block(n_ncvl);
        let d = block(n_ncvl);
        let cd = block(n_cvl * n_ncvl);
        let dd = block(n_ncvl * n_ncvl);
        Self { n_cvl, n_ncvl, c, db, d, cd, dd }
    }

    /// All factors equal to one (shadowing and fading at their medians / means).
    pub fn unit(n_cvl: usize, n_ncvl: usize) -> Self {
        let n = n_cvl;
        Self {
            n_cvl,
            n_ncvl,
            c: vec![1.0; n_cvl * n],
            db: vec![1.0; n_ncvl * n],
            d: vec![1.0; n_ncvl * n],
            cd: vec![1.0; n_cvl * n_ncvl * n],
            dd: vec![1.0; n_ncvl * n_ncvl * n],
        }
    }
}

/// Linear channel gains for every desired and interfering link on every CL.
///
/// Indexing: `h_c(cvl, cl)`, `h_db(ncvl, cl)`, `h_d(ncvl, cl)`,
/// `h_cd(cvl_tx, ncvl_rx, cl)`, `h_dd(ncvl_tx, ncvl_rx, cl)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGains {
    n_cvl: usize,
    n_ncvl: usize,
    h_c: Vec<f64>,
    h_db: Vec<f64>,
    h_d: Vec<f64>,
    h_cd: Vec<f64>,
    h_dd: Vec<f64>,
}

impl ChannelGains {
    /// Combine geometry with fading draws.
    pub fn compose(topology: &Topology, fading: &FadingDraws, model: &ChannelModel) -> Result<Self> {
        let n = topology.n_cvl();
        let m = topology.n_ncvl();
        if fading.n_cvl != n || fading.n_ncvl != m {
            return Err(Error::InvalidParams("fading draws do not match topology size".into()));
        }
        let bs = topology.bs_position;
        let mut h_c = Vec::with_capacity(n * n);
        for i in 0..n {
            let g = model.path_gain(topology.vue_positions[i].dist(bs))?;
            h_c.extend((0..n).map(|l| g * fading.c[i * n + l]));
        }
        let mut h_db = Vec::with_capacity(m * n);
        let mut h_d = Vec::with_capacity(m * n);
        for j in 0..m {
            let tx = topology.ncvl_tx_positions[j];
            let g_b = model.path_gain(tx.dist(bs))?;
            let g_d = model.path_gain(tx.dist(topology.ncvl_rx_positions[j]))?;
            h_db.extend((0..n).map(|l| g_b * fading.db[j * n + l]));
            h_d.extend((0..n).map(|l| g_d * fading.d[j * n + l]));
        }
        let mut h_cd = Vec::with_capacity(n * m * n);
        for i in 0..n {
            let tx = topology.cvl_tx(i);
            for j in 0..m {
                let g = model.path_gain(tx.dist(topology.ncvl_rx_positions[j]))?;
                let base = (i * m + j) * n;
                h_cd.extend((0..n).map(|l| g * fading.cd[base + l]));
            }
        }
        let mut h_dd = Vec::with_capacity(m * m * n);
        for k in 0..m {
            let tx = topology.ncvl_tx_positions[k];
            for j in 0..m {
                let g = model.path_gain(tx.dist(topology.ncvl_rx_positions[j]))?;
                let base = (k * m + j) * n;
                h_dd.extend((0..n).map(|l| g * fading.dd[base + l]));
            }
        }
        Ok(Self { n_cvl: n, n_ncvl: m, h_c, h_db, h_d, h_cd, h_dd })
    }

    /// Build gains from closures; mostly useful for hand-made test cells.
    pub fn from_fn(
        n_cvl: usize,
        n_ncvl: usize,
        h_c: impl Fn(usize, usize) -> f64,
        h_db: impl Fn(usize, usize) -> f64,
        h_d: impl Fn(usize, usize) -> f64,
        h_cd: impl Fn(usize, usize, usize) -> f64,
        h_dd: impl Fn(usize, usize, usize) -> f64,
    ) -> Self {
        let n = n_cvl;
        let m = n_ncvl;
        let mut g = Self {
            n_cvl,
            n_ncvl,
            h_c: Vec::with_capacity(n * n),
            h_db: Vec::with_capacity(m * n),
            h_d: Vec::with_capacity(m * n),
            h_cd: Vec::with_capacity(n * m * n),
            h_dd: Vec::with_capacity(m * m * n),
        };
        for i in 0..n {
            g.h_c.extend((0..n).map(|l| h_c(i, l)));
        }
        for j in 0..m {
            g.h_db.extend((0..n).map(|l| h_db(j, l)));
        }
        for j in 0..m {
            g.h_d.extend((0..n).map(|l| h_d(j, l)));
        }
        for i in 0..n {
            for j in 0..m {
                g.h_cd.extend((0..n).map(|l| h_cd(i, j, l)));
            }
        }
        for k in 0..m {
            for j in 0..m {
                g.h_dd.extend((0..n).map(|l| h_dd(k, j, l)));
            }
        }
        g
    }

    pub fn n_cvl(&self) -> usize {
        self.n_cvl
    }

    pub fn n_ncvl(&self) -> usize {
        self.n_ncvl
    }

    pub fn n_cl(&self) -> usize {
        self.n_cvl
    }

    #[inline]
    pub fn h_c(&self, cvl: usize, cl: usize) -> f64 {
        self.h_c[cvl * self.n_cvl + cl]
    }

    #[inline]
    pub fn h_db(&self, ncvl: usize, cl: usize) -> f64 {
        self.h_db[ncvl * self.n_cvl + cl]
    }

    #[inline]
    pub fn h_d(&self, ncvl: usize, cl: usize) -> f64 {
        self.h_d[ncvl * self.n_cvl + cl]
    }

    #[inline]
    pub fn h_cd(&self, cvl_tx: usize, ncvl_rx: usize, cl: usize) -> f64 {
        self.h_cd[(cvl_tx * self.n_ncvl + ncvl_rx) * self.n_cvl + cl]
    }

    #[inline]
    pub fn h_dd(&self, ncvl_tx: usize, ncvl_rx: usize, cl: usize) -> f64 {
        self.h_dd[(ncvl_tx * self.n_ncvl + ncvl_rx) * self.n_cvl + cl]
    }

    /// Every gain multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|x| x * c).collect();
        Self {
            n_cvl: self.n_cvl,
            n_ncvl: self.n_ncvl,
            h_c: s(&self.h_c),
            h_db: s(&self.h_db),
            h_d: s(&self.h_d),
            h_cd: s(&self.h_cd),
            h_dd: s(&self.h_dd),
        }
    }

    pub fn all_positive_finite(&self) -> bool {
        [&self.h_c, &self.h_db, &self.h_d, &self.h_cd, &self.h_dd]
            .iter()
            .all(|v| v.iter().all(|&x| x > 0.0 && x.is_finite()))
    }
}
