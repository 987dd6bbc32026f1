//! Galton–Watson approximation of the determination tree.
//!
//! Each excursion of a flag at the boundary ends in a `+` mark, a `-` mark
//! or a branching mark. Treating successive excursions as independent gives
//! a binary Galton–Watson tree whose solved root has law `Bernoulli(α)`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{build_determination_tree, DeterminationTree, LocalMarkSampler, NodeLabel, Sign, TreeOutcome};
use crate::error::{Error, Result};
use crate::model::{ModelParams, Side};

/// Outcome law of one boundary excursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbs {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_branch: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProbMode {
    /// Exact excursion probabilities at the given `N`.
    #[default]
    FiniteN,
    /// `N → ∞` values.
    Limit,
}

impl OutcomeProbs {
    /// From unnormalized weights; `p_branch` takes up the rounding so that
    /// the three values sum to one.
    fn from_weights(plus: f64, minus: f64, branch: f64) -> Self {
        let total = plus + minus + branch;
        let p_plus = plus / total;
        let p_minus = minus / total;
        OutcomeProbs {
            p_plus,
            p_minus,
            p_branch: 1.0 - (p_plus + p_minus),
        }
    }
}

pub fn outcome_probs(params: &ModelParams, side: Side, mode: ProbMode) -> OutcomeProbs {
    let res = params.reservoir(side);
    let (r, b, c, rho) = (res.r, res.b, res.c, res.rho_bar);
    match mode {
        ProbMode::Limit => OutcomeProbs::from_weights(r * rho, r * (1.0 - rho), b),
        ProbMode::FiniteN => {
            // flag at the inner site: branch w.p. b/(b+c+N^θ); otherwise it
            // reaches the outer site, where a ± mark (rate r) competes with
            // the way back (rate N^θ)
            let nt = (params.n as f64).powf(params.theta);
            let reach = (c + nt) / (b + c + nt);
            let p1 = |rho_pm: f64| reach * r * rho_pm / (r + nt);
            let p2 = b / (b + c + nt);
            OutcomeProbs::from_weights(p1(rho), p1(1.0 - rho), p2)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GwSample {
    Tree(DeterminationTree),
    Overflow,
}

/// Sample the labeled tree: each `*` leaf gets two `*` children with
/// probability `p_branch`, otherwise one `±` child.
pub fn sample_gw_tree<R: Rng + ?Sized>(probs: &OutcomeProbs, rng: &mut R, max_nodes: usize) -> GwSample {
    let mut tree = DeterminationTree::with_root(NodeLabel::Star);
    let mut open = vec![0usize];
    let p_sign = probs.p_plus + probs.p_minus;
    while let Some(v) = open.pop() {
        let u: f64 = rng.random();
        if u < probs.p_branch && probs.p_branch > 0.0 {
            if tree.len() + 2 > max_nodes {
                return GwSample::Overflow;
            }
            let a = tree.add_child(v, NodeLabel::Star);
            let b = tree.add_child(v, NodeLabel::Star);
            open.push(b);
            open.push(a);
        } else {
            if tree.len() + 1 > max_nodes {
                return GwSample::Overflow;
            }
            let plus = rng.random::<f64>() * p_sign < probs.p_plus;
            tree.add_child(v, NodeLabel::Leaf(Sign::from_bool(plus)));
        }
    }
    GwSample::Tree(tree)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha_hat: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub overflows: u64,
}

const CHUNK: u64 = 4096;

/// Monte Carlo estimate of `P(L(T) = +)` under the tree law of `side`.
/// Fails when more than 0.1% of the samples overflow `max_nodes`.
pub fn estimate_alpha_gw(params: &ModelParams, side: Side, mode: ProbMode, n_samples: u64, seed: u64, max_nodes: usize) -> Result<AlphaEstimate> {
    if n_samples < 2 {
        return Err(Error::Domain("n_samples must be >= 2".into()));
    }
    let probs = outcome_probs(params, side, mode);
    let (plus, overflows) = (0..n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ c);
            let (mut plus, mut over) = (0u64, 0u64);
            for _ in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                match sample_gw_tree(&probs, &mut rng, max_nodes) {
                    GwSample::Tree(t) => plus += t.solve().expect("sampled trees are valid").is_plus() as u64,
                    GwSample::Overflow => over += 1,
                }
            }
            (plus, over)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let rate = overflows as f64 / n_samples as f64;
    if rate > 1e-3 {
        return Err(Error::Overflow { rate });
    }
    let m = n_samples - overflows;
    let (alpha_hat, stderr) = crate::stats::bernoulli_mean_stderr(plus, m);
    Ok(AlphaEstimate {
        alpha_hat,
        stderr,
        n_samples: m,
        overflows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeLawEntry {
    pub tree: String,
    pub dual_freq: f64,
    pub gw_freq: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeLawReport {
    pub n: usize,
    pub t: f64,
    pub n_samples: u64,
    pub max_size: usize,
    pub entries: Vec<TreeLawEntry>,
    pub tv_distance: f64,
    /// Dual runs whose construction failed.
    pub dual_failed: u64,
    /// Samples larger than `max_size` (or overflowing), per side.
    pub dual_truncated: u64,
    pub gw_truncated: u64,
}

impl TreeLawReport {
    pub fn freq(&self, tree: &str) -> Option<&TreeLawEntry> {
        self.entries.iter().find(|e| e.tree == tree)
    }
}

/// Compare the law of the determination tree of the flag process started
/// from site 3 (run to time `t`, left reservoir, flags alive at `t` closed
/// with independent Bernoulli(`ρ̄`) values) with the finite-`N` tree law.
pub fn compare_tree_laws(params: &ModelParams, t: f64, n_samples: u64, seed: u64, max_size: usize) -> Result<TreeLawReport> {
    params.validate()?;
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be >= 1".into()));
    }
    let n = params.n;
    let rho = params.rho_bar;
    let probs = outcome_probs(params, Side::Left, ProbMode::FiniteN);
    let budget = max_size.max(64) * 64;
    type Counts = (BTreeMap<String, (u64, u64)>, u64, u64, u64);
    let merge = |mut a: Counts, b: Counts| {
        for (k, v) in b.0 {
            let e = a.0.entry(k).or_insert((0, 0));
            e.0 += v.0;
            e.1 += v.1;
        }
        (a.0, a.1 + b.1, a.2 + b.2, a.3 + b.3)
    };
    let (counts, failed, dual_trunc, gw_trunc): Counts = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let s = seed ^ i;
            let mut out: Counts = (BTreeMap::new(), 0, 0, 0);
            let mut close_rng = ChaCha8Rng::seed_from_u64(s.rotate_left(17) ^ 0x5eed);
            let mut src = LocalMarkSampler::new(params, ChaCha8Rng::seed_from_u64(s));
            let run = build_determination_tree(3, n, &mut src, t, budget, |_| close_rng.random::<f64>() < rho);
            match run.outcome {
                TreeOutcome::Tree(tr) if tr.len() <= max_size => {
                    out.0.entry(tr.canonical()).or_insert((0, 0)).0 += 1;
                }
                TreeOutcome::Failed => out.1 += 1,
                _ => out.2 += 1,
            }
            let mut rng = ChaCha8Rng::seed_from_u64(s.rotate_left(31) ^ 0x6a77);
            match sample_gw_tree(&probs, &mut rng, budget) {
                GwSample::Tree(tr) if tr.len() <= max_size => {
                    out.0.entry(tr.canonical()).or_insert((0, 0)).1 += 1;
                }
                _ => out.3 += 1,
            }
            out
        })
        .reduce(|| (BTreeMap::new(), 0, 0, 0), merge);
    let total = n_samples as f64;
    let mut entries: Vec<TreeLawEntry> = counts
        .into_iter()
        .map(|(tree, (a, b))| {
            let (dual_freq, gw_freq) = (a as f64 / total, b as f64 / total);
            TreeLawEntry {
                tree,
                dual_freq,
                gw_freq,
                abs_diff: (dual_freq - gw_freq).abs(),
            }
        })
        .collect();
    entries.sort_by(|x, y| (y.dual_freq + y.gw_freq).total_cmp(&(x.dual_freq + x.gw_freq)).then_with(|| x.tree.cmp(&y.tree)));
    let tv_distance = 0.5 * entries.iter().map(|e| e.abs_diff).sum::<f64>();
    Ok(TreeLawReport {
        n,
        t,
        n_samples,
        max_size,
        entries,
        tv_distance,
        dual_failed: failed,
        dual_truncated: dual_trunc,
        gw_truncated: gw_trunc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Reservoir;

    fn params(r: f64, rho: f64, b: f64, c: f64) -> ModelParams {
        ModelParams::new(100, 0.5, Reservoir::new(r, rho, b, c), Reservoir::new(r, rho, b, c)).unwrap()
    }

    #[test]
    fn limit_without_branching() {
        let p = outcome_probs(&params(1.0, 0.3, 0.0, 0.2), Side::Left, ProbMode::Limit);
        assert_eq!((p.p_plus, p.p_minus, p.p_branch), (0.3, 0.7, 0.0));
    }

    #[test]
    fn finite_n_closed_form() {
        let pr = params(1.0, 0.4, 0.5, 0.3);
        let p = outcome_probs(&pr, Side::Left, ProbMode::FiniteN);
        let nt = 10.0;
        let denom = (0.3 + nt) * 1.0 + 0.5 * (1.0 + nt);
        assert!((p.p_plus - (0.3 + nt) * 0.4 / denom).abs() < 1e-15);
        assert!((p.p_minus - (0.3 + nt) * 0.6 / denom).abs() < 1e-15);
        assert_eq!(p.p_plus + p.p_minus + p.p_branch, 1.0);
    }

    #[test]
    fn no_branching_gives_single_edge() {
        let probs = OutcomeProbs { p_plus: 0.5, p_minus: 0.5, p_branch: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let GwSample::Tree(t) = sample_gw_tree(&probs, &mut rng, 10) else { panic!() };
            assert_eq!(t.len(), 2);
        }
    }

    #[test]
    fn supercritical_overflows() {
        let probs = OutcomeProbs { p_plus: 0.1, p_minus: 0.1, p_branch: 0.8 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let over = (0..200).filter(|_| sample_gw_tree(&probs, &mut rng, 1000) == GwSample::Overflow).count();
        assert!(over > 100);
        let p = params(1.0, 0.5, 0.9, 0.0);
        let mut q = p.clone();
        q.b = 4.0;
        assert!(matches!(
            estimate_alpha_gw(&q, Side::Left, ProbMode::Limit, 10_000, 1, 1000),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn alpha_edge_cases() {
        let e = estimate_alpha_gw(&params(1.0, 1.0, 0.5, 0.0), Side::Left, ProbMode::Limit, 10_000, 3, 100_000).unwrap();
        assert_eq!(e.alpha_hat, 1.0);
        let e = estimate_alpha_gw(&params(1.0, 0.3, 0.0, 0.0), Side::Left, ProbMode::Limit, 100_000, 3, 100_000).unwrap();
        assert!((e.alpha_hat - 0.3).abs() < 4.0 * e.stderr);
    }

    #[test]
    fn tree_law_report_without_branching() {
        let mut p = params(1.0, 0.3, 0.0, 0.2);
        p.b_prime = 0.0;
        let t = (p.n as f64).powf(-p.theta_hat());
        let rep = compare_tree_laws(&p, t, 4000, 5, 8).unwrap();
        assert!(rep.entries.iter().all(|e| e.tree == "(+)" || e.tree == "(-)"));
        assert!(rep.tv_distance < 0.05, "{}", rep.tv_distance);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("tv_distance"));
    }
}
