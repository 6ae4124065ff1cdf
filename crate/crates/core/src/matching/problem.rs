use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::scenario::Scenario;

/// Gains, QoS thresholds and power caps of one CVL and the NCVLs sharing
/// its CL. Link 0 is the CVL; link `j + 1` is the `j`-th admitted NCVL.
#[derive(Debug, Clone, PartialEq)]
pub struct PerClProblem {
    /// CVL transmitter to BS.
    pub g_c: f64,
    /// NCVL transmitter to BS.
    pub g_db: Vec<f64>,
    /// NCVL desired link.
    pub g_d: Vec<f64>,
    /// CVL transmitter to NCVL receiver.
    pub g_cd: Vec<f64>,
    /// `g_dd[k][j]`: transmitter of NCVL `k` to receiver of NCVL `j`.
    /// The diagonal is never read.
    pub g_dd: Vec<Vec<f64>>,
    /// Minimum SINRs, CVL first.
    pub gamma_vec: Vec<f64>,
    /// Power caps in mW, CVL first.
    pub p_max_vec: Vec<f64>,
    /// Noise power in mW.
    pub noise: f64,
}

impl PerClProblem {
    /// A CVL alone on its CL.
    pub fn standalone(g_c: f64, gamma_c: f64, p_max_c: f64, noise: f64) -> Self {
        Self {
            g_c,
            g_db: Vec::new(),
            g_d: Vec::new(),
            g_cd: Vec::new(),
            g_dd: Vec::new(),
            gamma_vec: vec![gamma_c],
            p_max_vec: vec![p_max_c],
            noise,
        }
    }

    /// The group formed by CVL `cvl` on CL `cl` with NCVLs `beta` (in
    /// admission order).
    pub fn for_group(scenario: &Scenario, cvl: usize, cl: usize, beta: &[usize]) -> Self {
        let gains = &scenario.gains;
        let params = &scenario.params;
        let mut problem = Self::standalone(
            gains.h_c(cvl, cl),
            scenario.qos.gamma_c_min[cvl],
            params.max_cvl_power_mw(),
            params.noise_mw(),
        );
        for (pos, &j) in beta.iter().enumerate() {
            problem = problem.extended(scenario, cvl, cl, &beta[..pos], j);
        }
        problem
    }

    /// This group with NCVL `j` appended. `members` are the NCVL indices
    /// already in the group, in admission order.
    pub fn extended(&self, scenario: &Scenario, cvl: usize, cl: usize, members: &[usize], j: usize) -> Self {
        debug_assert_eq!(members.len(), self.n_ncvl());
        let gains = &scenario.gains;
        let to_new: Vec<f64> = members.iter().map(|&k| gains.h_dd(k, j, cl)).collect();
        let from_new: Vec<f64> = members.iter().map(|&k| gains.h_dd(j, k, cl)).collect();
        let mut out = self.clone();
        out.push_link(
            gains.h_db(j, cl),
            gains.h_d(j, cl),
            gains.h_cd(cvl, j, cl),
            &to_new,
            &from_new,
            scenario.qos.gamma_d_min[j],
            scenario.params.max_ncvl_power_mw(),
        );
        out
    }

    /// Appends a link given its gains. `to_new[k]` is the gain from member
    /// `k`'s transmitter to the new receiver and `from_new[k]` from the new
    /// transmitter to member `k`'s receiver.
    #[allow(clippy::too_many_arguments)]
    pub fn push_link(
        &mut self,
        g_db: f64,
        g_d: f64,
        g_cd: f64,
        to_new: &[f64],
        from_new: &[f64],
        gamma: f64,
        p_max: f64,
    ) {
        let n = self.n_ncvl();
        assert_eq!(to_new.len(), n);
        assert_eq!(from_new.len(), n);
        for (k, row) in self.g_dd.iter_mut().enumerate() {
            row.push(to_new[k]);
        }
        let mut new_row = from_new.to_vec();
        new_row.push(g_d);
        self.g_dd.push(new_row);
        self.g_db.push(g_db);
        self.g_d.push(g_d);
        self.g_cd.push(g_cd);
        self.gamma_vec.push(gamma);
        self.p_max_vec.push(p_max);
    }

    /// Number of admitted NCVLs `N_i`.
    pub fn n_ncvl(&self) -> usize {
        self.g_d.len()
    }

    /// `N_i + 1`.
    pub fn n_links(&self) -> usize {
        self.g_d.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_ncvl();
        let dims_ok = self.g_db.len() == n
            && self.g_cd.len() == n
            && self.g_dd.len() == n
            && self.g_dd.iter().all(|r| r.len() == n)
            && self.gamma_vec.len() == n + 1
            && self.p_max_vec.len() == n + 1;
        if !dims_ok {
            return Err(Error::InvalidParams("per-CL problem dimensions disagree".into()));
        }
        let gains_ok = std::iter::once(self.g_c)
            .chain(self.g_db.iter().copied())
            .chain(self.g_d.iter().copied())
            .chain(self.g_cd.iter().copied())
            .chain((0..n).flat_map(|k| (0..n).filter(move |&j| j != k).map(move |j| (k, j))).map(|(k, j)| self.g_dd[k][j]))
            .all(|g| g > 0.0 && g.is_finite());
        if !gains_ok {
            return Err(Error::InvalidParams("gains must be positive and finite".into()));
        }
        if self.gamma_vec.iter().any(|g| !(*g >= 0.0) || !g.is_finite())
            || self.p_max_vec.iter().any(|p| !(*p >= 0.0) || !p.is_finite())
            || !(self.noise > 0.0)
        {
            return Err(Error::InvalidParams("thresholds, caps and noise must be non-negative".into()));
        }
        Ok(())
    }

    /// `G[r][s]`: gain from transmitter `s` to receiver `r` (receiver 0 is the
    /// BS).
    pub fn gain_matrix(&self) -> SquareMatrix {
        let d = self.n_links();
        let mut g = SquareMatrix::zeros(d);
        g.set(0, 0, self.g_c);
        for j in 0..self.n_ncvl() {
            g.set(0, j + 1, self.g_db[j]);
            g.set(j + 1, 0, self.g_cd[j]);
            g.set(j + 1, j + 1, self.g_d[j]);
            for k in 0..self.n_ncvl() {
                if k != j {
                    g.set(j + 1, k + 1, self.g_dd[k][j]);
                }
            }
        }
        g
    }

    /// `sigma^2 * gamma`.
    pub fn qos_rhs(&self) -> Vec<f64> {
        self.gamma_vec.iter().map(|g| self.noise * g).collect()
    }

    /// Every gain multiplied by `c`.
    pub fn scaled_gains(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.g_c *= c;
        for v in out.g_db.iter_mut().chain(out.g_d.iter_mut()).chain(out.g_cd.iter_mut()) {
            *v *= c;
        }
        for row in &mut out.g_dd {
            for v in row {
                *v *= c;
            }
        }
        out
    }
}

/// The QoS matrix `H` with `H p >= sigma^2 gamma` equivalent to the SINR
/// constraints.
///
/// Row 0 (CVL): `g_c` on the diagonal, `-g_db[j] * gamma_c` elsewhere.
/// Row `j + 1` (NCVL `j`): `g_d[j]` on the diagonal, `-g_cd[j] * gamma_j`
/// in column 0 and `-g_dd[k][j] * gamma_j` in column `k + 1`.
pub fn build_qos_matrix(problem: &PerClProblem) -> SquareMatrix {
    let n = problem.n_ncvl();
    let mut h = SquareMatrix::zeros(n + 1);
    let gamma_c = problem.gamma_vec[0];
    h.set(0, 0, problem.g_c);
    for j in 0..n {
        let gamma_j = problem.gamma_vec[j + 1];
        h.set(0, j + 1, -problem.g_db[j] * gamma_c);
        h.set(j + 1, 0, -problem.g_cd[j] * gamma_j);
        h.set(j + 1, j + 1, problem.g_d[j]);
        for k in 0..n {
            if k != j {
                h.set(j + 1, k + 1, -problem.g_dd[k][j] * gamma_j);
            }
        }
    }
    h
}
