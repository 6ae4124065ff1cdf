use std::f64::consts::LN_2;

use nalgebra::DMatrix;

use crate::linalg::SquareMatrix;
use crate::matching::PerClProblem;

/// Numerators and denominators of the SINRs of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTerms {
    pub a_c: f64,
    pub b_c: f64,
    pub a_d: Vec<f64>,
    pub b_d: Vec<f64>,
}

impl RateTerms {
    pub fn sinr_c(&self) -> f64 {
        self.a_c / self.b_c
    }

    pub fn sinr_d(&self) -> Vec<f64> {
        self.a_d.iter().zip(&self.b_d).map(|(a, b)| a / b).collect()
    }
}

/// Gain matrix view of a group: receiver `r` sees `G[r][s] * p[s]` from
/// transmitter `s`, plus noise. Precomputed once per group so the rate,
/// gradient and Hessian evaluations in the inner loops stay allocation-light.
#[derive(Debug, Clone)]
pub struct LinkModel {
    g: SquareMatrix,
    noise: f64,
}

impl LinkModel {
    pub fn new(problem: &PerClProblem) -> Self {
        Self {
            g: problem.gain_matrix(),
            noise: problem.noise,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// `(A_r, B_r)`: desired power and noise-plus-interference at receiver `r`.
    #[inline]
    pub fn received(&self, r: usize, p: &[f64]) -> (f64, f64) {
        let row = self.g.row(r);
        let mut interference = 0.0;
        for (s, (&g, &x)) in row.iter().zip(p).enumerate() {
            if s != r {
                interference += g * x;
            }
        }
        (row[r] * p[r], self.noise + interference)
    }

    /// Change of `(A_r, B_r)` along `step`.
    #[inline]
    pub fn received_increment(&self, r: usize, step: &[f64]) -> (f64, f64) {
        let row = self.g.row(r);
        let mut interference = 0.0;
        for (s, (&g, &x)) in row.iter().zip(step).enumerate() {
            if s != r {
                interference += g * x;
            }
        }
        (row[r] * step[r], interference)
    }

    pub fn rate_terms(&self, p: &[f64]) -> RateTerms {
        let (a_c, b_c) = self.received(0, p);
        let (a_d, b_d) = (1..self.dim()).map(|r| self.received(r, p)).unzip();
        RateTerms { a_c, b_c, a_d, b_d }
    }

    pub fn sinrs(&self, p: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|r| {
                let (a, b) = self.received(r, p);
                a / b
            })
            .collect()
    }

    pub fn link_rates(&self, p: &[f64]) -> Vec<f64> {
        self.sinrs(p).into_iter().map(|s| s.ln_1p() / LN_2).collect()
    }

    pub fn sum_rate(&self, p: &[f64]) -> f64 {
        (0..self.dim())
            .map(|r| {
                let (a, b) = self.received(r, p);
                (a / b).ln_1p()
            })
            .sum::<f64>()
            / LN_2
    }

    /// `(r_cav, r_vex)` with `r_cav = sum log2(B + A)` and
    /// `r_vex = -sum log2(B)`.
    pub fn dc_split(&self, p: &[f64]) -> (f64, f64) {
        let mut cav = 0.0;
        let mut vex = 0.0;
        for r in 0..self.dim() {
            let (a, b) = self.received(r, p);
            cav += (b + a).log2();
            vex -= b.log2();
        }
        (cav, vex)
    }

    pub fn r_cav(&self, p: &[f64]) -> f64 {
        self.dc_split(p).0
    }

    /// Gradient of the convex part: `-sum_r interference_r / (ln2 * B_r)`.
    pub fn grad_r_vex(&self, p: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut grad = vec![0.0; d];
        for r in 0..d {
            let (_, b) = self.received(r, p);
            let w = 1.0 / (LN_2 * b);
            for (s, gs) in grad.iter_mut().enumerate() {
                if s != r {
                    *gs -= self.g.get(r, s) * w;
                }
            }
        }
        grad
    }

    /// Gradient of the concave part: `sum_r G[r] / (ln2 * (A_r + B_r))`.
    pub fn grad_r_cav(&self, p: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut grad = vec![0.0; d];
        for r in 0..d {
            let (a, b) = self.received(r, p);
            let w = 1.0 / (LN_2 * (a + b));
            for (s, gs) in grad.iter_mut().enumerate() {
                *gs += self.g.get(r, s) * w;
            }
        }
        grad
    }

    /// Hessian of the concave part: `-(1/ln2) sum_r G[r] G[r]^T / (A_r + B_r)^2`.
    pub fn hess_r_cav(&self, p: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for r in 0..d {
            let (a, b) = self.received(r, p);
            let w = -1.0 / (LN_2 * (a + b) * (a + b));
            let row = self.g.row(r);
            for i in 0..d {
                let wi = w * row[i];
                for j in 0..d {
                    h[(i, j)] += wi * row[j];
                }
            }
        }
        h
    }

    /// `F` with `hess_r_cav = -F^T F`: row `r` is `G[r] / (sqrt(ln2) (A_r + B_r))`.
    pub fn cav_factor(&self, p: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let weights: Vec<f64> = (0..d)
            .map(|r| {
                let (a, b) = self.received(r, p);
                1.0 / (LN_2.sqrt() * (a + b))
            })
            .collect();
        DMatrix::from_fn(d, d, |r, s| weights[r] * self.g.get(r, s))
    }

    pub fn grad_sum_rate(&self, p: &[f64]) -> Vec<f64> {
        self.grad_r_cav(p)
            .into_iter()
            .zip(self.grad_r_vex(p))
            .map(|(a, b)| a + b)
            .collect()
    }
}

pub fn rate_terms(p: &[f64], problem: &PerClProblem) -> RateTerms {
    LinkModel::new(problem).rate_terms(p)
}

/// Sum of the spectral efficiencies of the CVL and every NCVL of the group.
pub fn sum_rate_per_cl(p: &[f64], problem: &PerClProblem) -> f64 {
    LinkModel::new(problem).sum_rate(p)
}

pub fn dc_split(p: &[f64], problem: &PerClProblem) -> (f64, f64) {
    LinkModel::new(problem).dc_split(p)
}

pub fn grad_r_vex(p: &[f64], problem: &PerClProblem) -> Vec<f64> {
    LinkModel::new(problem).grad_r_vex(p)
}
