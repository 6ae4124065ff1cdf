//! Small dense linear algebra used on hot paths.

use nalgebra::{DMatrix, DVector};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {r} has wrong length");
            m.data[r * n..(r + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| self.row(r).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    ///
    /// Returns `None` when a pivot falls below `rel_tol * ||A||_inf`.
    pub fn solve(&self, b: &[f64], rel_tol: f64) -> Option<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        if n == 0 {
            return Some(Vec::new());
        }
        let tol = rel_tol * self.norm_inf();
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > tol) {
                return None;
            }
            if piv != k {
                for c in 0..n {
                    a.swap(k * n + c, piv * n + c);
                }
                x.swap(k, piv);
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let f = a[r * n + k] / d;
                if f == 0.0 {
                    continue;
                }
                for c in k..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
                x[r] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..n {
                s -= a[k * n + c] * x[c];
            }
            x[k] = s / a[k * n + k];
        }
        Some(x)
    }
}

/// Least squares by Householder QR; `None` when `a` is rank deficient.
fn lstsq_qr(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let qr = a.qr();
    let rhs = qr.q().transpose() * b;
    let r = qr.r();
    let diag = r.diagonal().amax();
    if (0..r.nrows()).any(|i| r[(i, i)].abs() <= 1e-13 * diag) {
        return None;
    }
    r.solve_upper_triangular(&rhs)
}

/// Non-negative least squares `min ||A x - b||_2, x >= 0` (Lawson-Hanson).
///
/// Columns are normalized first; the problem is invariant under positive
/// column scaling and the subproblems are better conditioned that way.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let k = a.ncols();
    if k == 0 {
        return DVector::zeros(0);
    }
    let norms: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    let a = &DMatrix::from_fn(a.nrows(), k, |i, j| {
        if norms[j] > 0.0 {
            a[(i, j)] / norms[j]
        } else {
            0.0
        }
    });
    let mut x = DVector::zeros(k);
    let tol = 1e-12 * b.amax().max(1e-300) * k as f64;
    let mut passive = vec![false; k];

    let ls_on = |passive: &[bool]| -> DVector<f64> {
        let cols: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
        let sub = a.select_columns(&cols);
        let sol = lstsq_qr(sub.clone(), b)
            .or_else(|| sub.svd(true, true).solve(b, 1e-14).ok())
            .unwrap_or_else(|| DVector::zeros(cols.len()));
        let mut full = DVector::zeros(k);
        for (c, &j) in cols.iter().enumerate() {
            full[j] = sol[c];
        }
        full
    };

    for _ in 0..(3 * k + 10) {
        let w = a.transpose() * (b - a * &x);
        let cand = (0..k)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = cand else { break };
        if w[t] <= tol {
            break;
        }
        passive[t] = true;
        for _ in 0..(3 * k + 10) {
            let s = ls_on(&passive);
            if (0..k).filter(|&j| passive[j]).all(|j| s[j] > 0.0) {
                x = s;
                break;
            }
            let alpha = (0..k)
                .filter(|&j| passive[j] && s[j] <= 0.0)
                .map(|j| x[j] / (x[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            x = &x + (s - &x) * alpha;
            for j in 0..k {
                if passive[j] && x[j] <= 1e-15 {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    for (xj, nj) in x.iter_mut().zip(&norms) {
        if *nj > 0.0 {
            *xj /= nj;
        }
    }
    x
}

/// `A^T A`, formed from contiguous columns and mirrored from the upper triangle.
pub fn gram(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.ncols();
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        let cj = a.column(j);
        let cj = cj.as_slice();
        for i in 0..=j {
            let ci = a.column(i);
            let v = dot4(ci.as_slice(), cj);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Dot product with four independent accumulators.
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, ra) = a.split_at(a.len() - a.len() % 4);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solves_small_system() {
        let a = SquareMatrix::from_rows(&[vec![1.0, -0.1], vec![-0.1, 1.0]]);
        let x = a.solve(&[0.1, 0.1], 1e-12).unwrap();
        let expect = 0.1 / 0.99 * 1.1;
        assert!((x[0] - expect).abs() < 1e-15 && (x[1] - expect).abs() < 1e-15);
    }

    #[test]
    fn detects_singular() {
        let a = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(a.solve(&[1.0, 1.0], 1e-12).is_none());
        assert_eq!(SquareMatrix::zeros(0).solve(&[], 1e-12), Some(vec![]));
    }

    #[test]
    fn nnls_clamps_negative_direction() {
        // min ||x1*e1 + x2*e2 - (1, -1)|| with x >= 0 -> x = (1, 0)
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, -1.0]);
        let x = nnls(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1] == 0.0);
    }

    /// Exhaustive-support oracle: NNLS optimum is the unconstrained least
    /// squares fit on some support whose coefficients are all >= 0.
    fn nnls_bruteforce(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
        let k = a.ncols();
        let mut best = b.norm();
        for mask in 1u32..(1 << k) {
            let cols: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).collect();
            let sub = a.select_columns(&cols);
            let Some(qr_sol) = sub.clone().svd(true, true).solve(b, 1e-14).ok() else { continue };
            if qr_sol.iter().all(|&v| v >= -1e-12) {
                best = best.min((&sub * qr_sol - b).norm());
            }
        }
        best
    }

    proptest! {
        #[test]
        fn lu_matches_nalgebra(vals in proptest::collection::vec(-5.0f64..5.0, 16), rhs in proptest::collection::vec(-5.0f64..5.0, 4)) {
            let mut m = SquareMatrix::zeros(4);
            for r in 0..4 { for c in 0..4 { m.set(r, c, vals[r * 4 + c] + if r == c { 12.0 } else { 0.0 }); } }
            let ours = m.solve(&rhs, 1e-12).unwrap();
            let theirs = m.to_nalgebra().lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
            for i in 0..4 { prop_assert!((ours[i] - theirs[i]).abs() < 1e-10); }
        }

        #[test]
        fn nnls_matches_bruteforce(vals in proptest::collection::vec(-3.0f64..3.0, 12), rhs in proptest::collection::vec(-3.0f64..3.0, 3)) {
            let a = DMatrix::from_row_slice(3, 4, &vals);
            let b = DVector::from_vec(rhs);
            let x = nnls(&a, &b);
            prop_assert!(x.iter().all(|&v| v >= 0.0));
            let ours = (&a * &x - &b).norm();
            let oracle = nnls_bruteforce(&a, &b);
            prop_assert!(ours <= oracle + 1e-8, "ours {} oracle {}", ours, oracle);
        }
    }

    #[test]
    fn gram_matches_product() {
        let a = DMatrix::from_fn(7, 5, |i, j| ((i * 5 + j) as f64).sin());
        assert!((gram(&a) - a.transpose() * &a).amax() < 1e-12);
    }
}
