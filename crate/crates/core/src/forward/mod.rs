//! Forward simulation of `η_t` and Monte Carlo density / correlation fields.

mod gillespie;
mod graphical;
mod profile;

pub use gillespie::GillespieEngine;
pub use graphical::{apply_mark, replay, run_graphical};
pub use profile::{sample_initial_with, InitialProfile};

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marks::MarkGenerator;
use crate::model::{Configuration, ModelParams};
use crate::stats::{Moments, OccupancyStats, PairSet};

/// Replicas handled per parallel work item.
const CHUNK: usize = 64;

/// Generator for replica `i` of a run seeded with `seed`.
pub fn replica_rng(seed: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ i)
}

pub fn sample_initial(profile: &InitialProfile, params: &ModelParams, seed: u64) -> Configuration {
    sample_initial_with(profile, params.n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A sample of `η_{t_end}` started from `eta0`.
pub fn run_gillespie(eta0: &Configuration, params: &ModelParams, t_end: f64, seed: u64) -> Configuration {
    let mut engine = GillespieEngine::new(params, eta0.clone(), ChaCha8Rng::seed_from_u64(seed));
    engine.advance_to(t_end);
    engine.into_state()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Gillespie,
    Graphical,
}

/// Run `n_samples` independent replicas from the product measure of
/// `profile` and record occupation statistics at each of `times`
/// (ascending).
pub fn simulate_ensemble(
    profile: &InitialProfile,
    params: &ModelParams,
    times: &[f64],
    n_samples: usize,
    seed: u64,
    engine: Engine,
    pairs: &PairSet,
) -> Result<Vec<OccupancyStats>> {
    profile.validate()?;
    params.validate()?;
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be >= 1".into()));
    }
    if times.windows(2).any(|w| w[0] > w[1]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::Domain("times must be non-negative and ascending".into()));
    }
    let n = params.n;
    let pair_list = pairs.pairs(n);
    let empty = OccupancyStats::new(n, pair_list);
    let chunks = n_samples.div_ceil(CHUNK);
    let partial: Vec<Vec<OccupancyStats>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![empty.clone(); times.len()];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let mut rng = replica_rng(seed, i as u64);
                let eta0 = sample_initial_with(profile, n, &mut rng);
                match engine {
                    Engine::Gillespie => {
                        let mut e = GillespieEngine::new(params, eta0, rng);
                        for (k, &t) in times.iter().enumerate() {
                            e.advance_to(t);
                            acc[k].push(e.state());
                        }
                    }
                    Engine::Graphical => {
                        let horizon = times.last().copied().unwrap_or(0.0);
                        let stream_seed = rng.next_u64();
                        let mut marks = MarkGenerator::new(params, horizon, stream_seed).peekable();
                        let mut eta = eta0;
                        for (k, &t) in times.iter().enumerate() {
                            while let Some(m) = marks.next_if(|m| m.time <= t) {
                                apply_mark(&mut eta, m.kind);
                            }
                            acc[k].push(&eta);
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = vec![empty; times.len()];
    for part in &partial {
        for (o, p) in out.iter_mut().zip(part) {
            *o = std::mem::replace(o, OccupancyStats::new(2, vec![])).merge(p);
        }
    }
    Ok(out)
}

/// Time-averaged occupation profile of independent replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAverage {
    /// Snapshot times shared by all replicas.
    pub times: Vec<f64>,
    /// Index `x - 1` holds site `x`.
    pub values: Vec<f64>,
    /// Standard error across replicas of the per-replica averages.
    pub stderr: Vec<f64>,
    pub n_replicas: u64,
}

/// Average `η_s(x)` over snapshots `s = t_start, t_start + spacing, …, <= t_end`
/// within each replica, then across replicas.
pub fn simulate_time_average(
    profile: &InitialProfile,
    params: &ModelParams,
    t_start: f64,
    t_end: f64,
    spacing: f64,
    n_replicas: usize,
    seed: u64,
) -> Result<TimeAverage> {
    profile.validate()?;
    params.validate()?;
    if !(spacing > 0.0 && 0.0 <= t_start && t_start <= t_end) || n_replicas < 2 {
        return Err(Error::Domain("need spacing > 0, 0 <= t_start <= t_end and >= 2 replicas".into()));
    }
    let k_max = ((t_end - t_start) / spacing + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=k_max).map(|k| t_start + k as f64 * spacing).collect();
    let n = params.n;
    let per_replica: Vec<Vec<f64>> = (0..n_replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i as u64);
            let eta0 = sample_initial_with(profile, n, &mut rng);
            let mut e = GillespieEngine::new(params, eta0, rng);
            let mut counts = vec![0u32; n - 1];
            for &t in &times {
                e.advance_to(t);
                for (c, v) in counts.iter_mut().zip(e.state().iter()) {
                    *c += v as u32;
                }
            }
            counts.iter().map(|&c| c as f64 / times.len() as f64).collect()
        })
        .collect();
    let mut values = Vec::with_capacity(n - 1);
    let mut stderr = Vec::with_capacity(n - 1);
    for x in 0..n - 1 {
        let m: Moments = per_replica.iter().map(|r| r[x]).collect();
        values.push(m.mean());
        stderr.push(m.stderr());
    }
    Ok(TimeAverage {
        times,
        values,
        stderr,
        n_replicas: n_replicas as u64,
    })
}

/// Empirical `ρ^N_t(x)` with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub t: f64,
    /// Index `x - 1` holds site `x`.
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: u64,
}

impl DensityField {
    pub fn from_stats(t: f64, stats: &OccupancyStats) -> Self {
        let (values, stderr) = (1..=stats.counts.len()).map(|x| stats.site(x)).unzip();
        DensityField {
            t,
            values,
            stderr,
            n_samples: stats.samples,
        }
    }

    pub fn at(&self, x: usize) -> f64 {
        self.values[x - 1]
    }
}

/// Empirical `φ^N_t(x, y)` on a set of pairs `x < y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationField {
    pub t: f64,
    pub pairs: Vec<(usize, usize)>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: u64,
}

impl CorrelationField {
    pub fn from_stats(t: f64, stats: &OccupancyStats) -> Self {
        let (values, stderr) = (0..stats.pairs.len()).map(|i| stats.pair(i)).unzip();
        CorrelationField {
            t,
            pairs: stats.pairs.clone(),
            values,
            stderr,
            n_samples: stats.samples,
        }
    }
}

pub fn estimate_density(
    profile: &InitialProfile,
    params: &ModelParams,
    t: f64,
    n_samples: usize,
    seed: u64,
) -> Result<DensityField> {
    let stats = simulate_ensemble(profile, params, &[t], n_samples, seed, Engine::Gillespie, &PairSet::List(vec![]))?;
    Ok(DensityField::from_stats(t, &stats[0]))
}

pub fn estimate_correlation(
    profile: &InitialProfile,
    params: &ModelParams,
    t: f64,
    n_samples: usize,
    seed: u64,
    pairs: &PairSet,
) -> Result<CorrelationField> {
    let n = params.n;
    for (x, y) in pairs.pairs(n) {
        if !(1 <= x && x < y && y < n) {
            return Err(Error::Domain(format!("pair ({x}, {y}) is not x < y inside the lattice")));
        }
    }
    let stats = simulate_ensemble(profile, params, &[t], n_samples, seed, Engine::Gillespie, pairs)?;
    Ok(CorrelationField::from_stats(t, &stats[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marks::{Mark, MarkKind, MarkStream};
    use crate::model::{Reservoir, Side};

    fn params(n: usize) -> ModelParams {
        ModelParams::new(
            n,
            0.5,
            Reservoir::new(1.0, 0.2, 0.5, 0.3),
            Reservoir::new(1.0, 0.9, 0.5, 0.3),
        )
        .unwrap()
    }

    fn bulk_only(n: usize) -> ModelParams {
        // reservoirs switched off entirely; bypasses validation on purpose
        ModelParams {
            r: 0.0,
            b: 0.0,
            c: 0.0,
            r_prime: 0.0,
            b_prime: 0.0,
            c_prime: 0.0,
            ..params(n)
        }
    }

    #[test]
    fn time_average_shape_and_reproducibility() {
        let p = params(10);
        let prof = InitialProfile::constant(1.0);
        let avg = simulate_time_average(&prof, &p, 0.0, 0.3, 0.1, 8, 1).unwrap();
        assert_eq!(avg.times.len(), 4);
        assert_eq!(avg.values.len(), 9);
        assert!(avg.values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(avg, simulate_time_average(&prof, &p, 0.0, 0.3, 0.1, 8, 1).unwrap());
        assert!(simulate_time_average(&prof, &p, 0.0, 0.3, 0.0, 4, 1).is_err());
    }

    #[test]
    fn constant_profiles_sample_exactly() {
        let p = params(20);
        assert_eq!(sample_initial(&InitialProfile::constant(1.0), &p, 1), Configuration::full(20));
        assert_eq!(sample_initial(&InitialProfile::constant(0.0), &p, 1), Configuration::empty(20));
    }

    #[test]
    fn half_profile_site_means() {
        let p = params(100);
        let prof = InitialProfile::constant(0.5);
        let stats = simulate_ensemble(&prof, &p, &[0.0], 10_000, 11, Engine::Gillespie, &PairSet::List(vec![])).unwrap();
        for x in 1..100 {
            let (m, _) = stats[0].site(x);
            assert!((m - 0.5).abs() < 4.0 * 0.5 / 100.0, "site {x}: {m}");
        }
    }

    #[test]
    fn bulk_dynamics_conserve_mass() {
        let p = bulk_only(15);
        let eta0 = Configuration::from_bits(&[
            true, false, true, true, false, false, true, false, true, false, false, true, true, false,
        ]);
        for seed in 0..20 {
            let eta = run_gillespie(&eta0, &p, 0.3, seed);
            assert_eq!(eta.particle_count(), eta0.particle_count());
        }
        let s = MarkStream::generate(&p, 0.3, 4);
        assert_eq!(run_graphical(&eta0, &s, 0.3).unwrap().particle_count(), eta0.particle_count());
    }

    #[test]
    fn zero_time_and_empty_stream() {
        let p = params(10);
        let eta0 = sample_initial(&InitialProfile::constant(0.5), &p, 8);
        assert_eq!(run_gillespie(&eta0, &p, 0.0, 1), eta0);
        let empty = MarkStream::from_marks(10, 1.0, vec![]);
        assert_eq!(run_graphical(&eta0, &empty, 1.0).unwrap(), eta0);
        assert!(run_graphical(&eta0, &empty, 1.5).is_err());
    }

    #[test]
    fn single_plus_mark_fills_site_one() {
        for first in [false, true] {
            let mut eta0 = Configuration::empty(10);
            eta0.set(1, first);
            let s = MarkStream::from_marks(
                10,
                1.0,
                vec![Mark {
                    time: 0.3,
                    kind: MarkKind::Plus(Side::Left),
                }],
            );
            assert!(run_graphical(&eta0, &s, 0.5).unwrap().get(1));
        }
    }

    #[test]
    fn mark_rules() {
        let mut eta = Configuration::from_bits(&[true, false, false, true, false, true, false, false, true]);
        apply_mark(&mut eta, MarkKind::Branch(Side::Left));
        assert!(eta.get(2));
        apply_mark(&mut eta, MarkKind::Minus(Side::Left));
        assert!(!eta.get(1));
        apply_mark(&mut eta, MarkKind::Branch(Side::Left));
        assert!(eta.get(2), "branch never empties");
        apply_mark(&mut eta, MarkKind::Copy(Side::Left));
        assert!(!eta.get(2));
        apply_mark(&mut eta, MarkKind::Copy(Side::Right));
        assert!(eta.get(8));
        apply_mark(&mut eta, MarkKind::Exchange(3));
        assert!(eta.get(3) && !eta.get(4));
    }

    #[test]
    fn ensemble_is_reproducible() {
        let p = params(30);
        let prof = InitialProfile::Linear { left: 0.1, right: 0.9 };
        let a = simulate_ensemble(&prof, &p, &[0.01, 0.02], 200, 5, Engine::Gillespie, &PairSet::MinGap(5)).unwrap();
        let b = simulate_ensemble(&prof, &p, &[0.01, 0.02], 200, 5, Engine::Gillespie, &PairSet::MinGap(5)).unwrap();
        assert_eq!(a, b);
        assert!(simulate_ensemble(&prof, &p, &[0.02, 0.01], 10, 5, Engine::Gillespie, &PairSet::All).is_err());
        assert!(estimate_density(&prof, &p, 0.1, 0, 1).is_err());
    }

    #[test]
    fn time_zero_correlations_vanish() {
        let p = params(12);
        let prof = InitialProfile::SineBump { base: 0.2, amplitude: 0.6 };
        let f = estimate_correlation(&prof, &p, 0.0, 20_000, 3, &PairSet::All).unwrap();
        for (v, se) in f.values.iter().zip(&f.stderr) {
            assert!(v.abs() < 4.5 * se + 1e-12, "{v} {se}");
        }
    }

    #[test]
    fn equilibrium_product_measure_is_invariant_without_branching() {
        let mut p = params(10);
        p.b = 0.0;
        p.b_prime = 0.0;
        p.rho_bar = 0.3;
        p.rho_bar_prime = 0.3;
        let f = estimate_density(&InitialProfile::constant(0.3), &p, 0.2, 20_000, 17).unwrap();
        for x in 1..10 {
            assert!((f.at(x) - 0.3).abs() < 4.0 * f.stderr[x - 1], "site {x}: {}", f.at(x));
        }
    }
}
