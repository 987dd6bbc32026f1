//! Mergeable Monte Carlo accumulators.
//!
//! Occupations are 0/1, so site and pair sums are kept as integer counts:
//! merging is exactly associative and commutative, and results do not depend
//! on how replicas were split across threads.

use serde::{Deserialize, Serialize};

use crate::model::Configuration;

/// Running `(count, sum, sum of squares)` of a real observable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for v in iter {
            m.push(v);
        }
        m
    }
}

/// Mean and standard error of a Bernoulli sample with `count` successes.
pub fn bernoulli_mean_stderr(count: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = count as f64 / n as f64;
    let se = if n > 1 {
        (p * (1.0 - p) / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    (p, se)
}

/// Sample covariance of two 0/1 variables and its standard error, from the
/// counts `cx = Σ X`, `cy = Σ Y`, `cxy = Σ XY`.
pub fn binary_covariance(cx: u64, cy: u64, cxy: u64, n: u64) -> (f64, f64) {
    if n < 2 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let px = cx as f64 / nf;
    let py = cy as f64 / nf;
    let p11 = cxy as f64 / nf;
    let cov_biased = p11 - px * py;
    let cov = cov_biased * nf / (nf - 1.0);
    let p10 = px - p11;
    let p01 = py - p11;
    let p00 = 1.0 - px - py + p11;
    let z11 = (1.0 - px) * (1.0 - py);
    let z10 = -(1.0 - px) * py;
    let z01 = -px * (1.0 - py);
    let z00 = px * py;
    let ez2 = p11 * z11 * z11 + p10 * z10 * z10 + p01 * z01 * z01 + p00 * z00 * z00;
    let var = (ez2 - cov_biased * cov_biased).max(0.0);
    (cov, (var / (nf - 1.0)).sqrt())
}

/// Which site pairs `(x, y)`, `x < y`, to track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PairSet {
    /// Every pair, upper-triangular row-major order.
    All,
    /// Pairs with `y - x >= min_gap`.
    MinGap(usize),
    List(Vec<(usize, usize)>),
}

impl PairSet {
    pub fn pairs(&self, n: usize) -> Vec<(usize, usize)> {
        let tri = |gap: usize| {
            let mut v = Vec::new();
            for x in 1..n {
                for y in x + gap.max(1)..n {
                    v.push((x, y));
                }
            }
            v
        };
        match self {
            PairSet::All => tri(1),
            PairSet::MinGap(g) => tri(*g),
            PairSet::List(v) => v.clone(),
        }
    }
}

/// Site and pair occupation counts over a set of sampled configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyStats {
    pub samples: u64,
    pub counts: Vec<u64>,
    pub pairs: Vec<(usize, usize)>,
    pub pair_counts: Vec<u64>,
}

impl OccupancyStats {
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Self {
        let np = pairs.len();
        OccupancyStats {
            samples: 0,
            counts: vec![0; n - 1],
            pairs,
            pair_counts: vec![0; np],
        }
    }

    pub fn push(&mut self, eta: &Configuration) {
        self.samples += 1;
        let raw = eta.raw();
        for (c, &v) in self.counts.iter_mut().zip(raw) {
            *c += v as u64;
        }
        for (c, &(x, y)) in self.pair_counts.iter_mut().zip(&self.pairs) {
            *c += (raw[x - 1] & raw[y - 1]) as u64;
        }
    }

    pub fn merge(mut self, other: &OccupancyStats) -> OccupancyStats {
        debug_assert_eq!(self.pairs, other.pairs);
        self.samples += other.samples;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.pair_counts.iter_mut().zip(&other.pair_counts) {
            *a += b;
        }
        self
    }

    /// Mean and standard error at site `x`.
    pub fn site(&self, x: usize) -> (f64, f64) {
        bernoulli_mean_stderr(self.counts[x - 1], self.samples)
    }

    /// Covariance and standard error of the `i`-th tracked pair.
    pub fn pair(&self, i: usize) -> (f64, f64) {
        let (x, y) = self.pairs[i];
        binary_covariance(self.counts[x - 1], self.counts[y - 1], self.pair_counts[i], self.samples)
    }
}
