use crate::error::{Error, Result};
use crate::scenario::ChannelGains;

/// Worst-case coupling of candidate `k` with the group of CVL `cvl` on CL
/// `cl` whose NCVLs are `beta`: the largest gain into `k`'s receiver from any
/// group transmitter, or from `k`'s transmitter into any group receiver.
pub fn minmax_score(gains: &ChannelGains, cvl: usize, cl: usize, beta: &[usize], k: usize) -> f64 {
    let s1 = beta
        .iter()
        .map(|&b| gains.h_dd(b, k, cl))
        .fold(gains.h_cd(cvl, k, cl), f64::max);
    let s2 = beta
        .iter()
        .map(|&b| gains.h_dd(k, b, cl))
        .fold(gains.h_db(k, cl), f64::max);
    s1.max(s2)
}

/// The candidate in `pool` with the smallest min-max score; ties go to the
/// lowest index.
pub fn select_candidate_ncvl(
    gains: &ChannelGains,
    cvl: usize,
    cl: usize,
    beta: &[usize],
    pool: &[usize],
) -> Result<usize> {
    pool.iter()
        .map(|&k| (k, minmax_score(gains, cvl, cl, beta, k)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(k, _)| k)
        .ok_or(Error::EmptyPool)
}

/// Running min-max scores for every NCVL against one growing group, so
/// each selection is a single pass over the pool.
#[derive(Debug, Clone)]
pub struct MinMaxScores {
    cl: usize,
    score: Vec<f64>,
}

impl MinMaxScores {
    pub fn new(gains: &ChannelGains, cvl: usize, cl: usize) -> Self {
        let score = (0..gains.n_ncvl())
            .map(|k| gains.h_cd(cvl, k, cl).max(gains.h_db(k, cl)))
            .collect();
        Self { cl, score }
    }

    /// Fold a newly admitted NCVL into every score.
    pub fn admit(&mut self, gains: &ChannelGains, b: usize) {
        for (k, s) in self.score.iter_mut().enumerate() {
            *s = s.max(gains.h_dd(b, k, self.cl)).max(gains.h_dd(k, b, self.cl));
        }
    }

    pub fn score(&self, k: usize) -> f64 {
        self.score[k]
    }

    /// Lowest-scoring member of the pool given as membership flags.
    pub fn best(&self, in_pool: &[bool]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (k, &member) in in_pool.iter().enumerate() {
            if member && best.map_or(true, |b| self.score[k] < self.score[b]) {
                best = Some(k);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_gains(seed: u64, n: usize, m: usize) -> ChannelGains {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.gen_range(1e-3..1.0)).collect() };
        let (c, db, d, cd, dd) = (draw(n * n), draw(m * n), draw(m * n), draw(n * m * n), draw(m * m * n));
        ChannelGains::from_fn(
            n,
            m,
            |i, l| c[i * n + l],
            |j, l| db[j * n + l],
            |j, l| d[j * n + l],
            |i, j, l| cd[(i * m + j) * n + l],
            |k, j, l| dd[(k * m + j) * n + l],
        )
    }

    #[test]
    fn empty_group_hand_example() {
        // candidate 0: (h_cd, h_db) = (0.5, 0.1) -> 0.5; candidate 1: (0.2, 0.3) -> 0.3
        let h_cd = [0.5, 0.2];
        let h_db = [0.1, 0.3];
        let g = ChannelGains::from_fn(1, 2, |_, _| 1.0, |j, _| h_db[j], |_, _| 1.0, |_, j, _| h_cd[j], |_, _, _| 1.0);
        assert_eq!(select_candidate_ncvl(&g, 0, 0, &[], &[0, 1]).unwrap(), 1);
        assert_eq!(minmax_score(&g, 0, 0, &[], 0), 0.5);
        assert_eq!(minmax_score(&g, 0, 0, &[], 1), 0.3);
    }

    #[test]
    fn singleton_and_empty_pool() {
        let g = random_gains(1, 2, 5);
        assert_eq!(select_candidate_ncvl(&g, 0, 1, &[], &[3]).unwrap(), 3);
        assert!(matches!(select_candidate_ncvl(&g, 0, 1, &[], &[]), Err(Error::EmptyPool)));
    }

    #[test]
    fn equal_gains_pick_lowest() {
        let g = ChannelGains::from_fn(2, 6, |_, _| 1.0, |_, _| 0.5, |_, _| 1.0, |_, _, _| 0.5, |_, _, _| 0.5);
        assert_eq!(select_candidate_ncvl(&g, 1, 0, &[0], &[5, 2, 4]).unwrap(), 2);
        let scores = MinMaxScores::new(&g, 1, 0);
        let mut pool = vec![false; 6];
        pool[5] = true;
        pool[2] = true;
        assert_eq!(scores.best(&pool), Some(2));
    }

    proptest! {
        #[test]
        fn incremental_matches_direct(seed in 0u64..1000, c in 1e-6f64..1e6) {
            let (n, m) = (3, 12);
            let g = random_gains(seed, n, m);
            let (cvl, cl) = ((seed % 3) as usize, ((seed / 3) % 3) as usize);
            let mut scores = MinMaxScores::new(&g, cvl, cl);
            let mut beta = Vec::new();
            let mut pool: Vec<usize> = (0..m).collect();
            while !pool.is_empty() {
                let flags: Vec<bool> = (0..m).map(|k| pool.contains(&k)).collect();
                let direct = select_candidate_ncvl(&g, cvl, cl, &beta, &pool).unwrap();
                prop_assert_eq!(scores.best(&flags), Some(direct));
                // Positive scaling of all gains leaves the choice unchanged.
                let scaled = g.scaled(c);
                prop_assert_eq!(select_candidate_ncvl(&scaled, cvl, cl, &beta, &pool).unwrap(), direct);
                beta.push(direct);
                scores.admit(&g, direct);
                pool.retain(|&k| k != direct);
            }
        }
    }
}
