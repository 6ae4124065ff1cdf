//! Rates, the DC split of the per-CL sum rate, and the majorization loop that
//! allocates powers inside each CL group.

mod kkt;
mod mami;
mod rates;

pub use kkt::{active_normals, kkt_residual, ACTIVE_TOL};
pub use mami::{interior_start, mami_power_allocation, optimize_group, GroupPower, MamiOptions, MamiStatus};
pub use rates::{dc_split, grad_r_vex, rate_terms, sum_rate_per_cl, LinkModel, RateTerms};

/// Powers of every CL group in a cell, indexed by priority position.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerAllocation {
    pub groups: Vec<GroupPower>,
}

impl PowerAllocation {
    pub fn p_per_cl(&self) -> Vec<&[f64]> {
        self.groups.iter().map(|g| g.p.as_slice()).collect()
    }

    pub fn iterations(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.iterations).collect()
    }

    pub fn kkt_residual(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.kkt_residual).collect()
    }

    pub fn sum_rate(&self) -> f64 {
        self.groups.iter().map(GroupPower::sum_rate).sum()
    }
}
