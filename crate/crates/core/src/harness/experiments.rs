use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{Check, CorrRow, DensityRow, ExperimentConfig, ExperimentKind, Report, RunOutput};
use crate::dual::{build_determination_tree, determination_tree, dual_stats_runs, FirstBoundary, LocalMarkSampler, Resolver, TreeOutcome, DEFAULT_MAX_NODES};
use crate::error::{Error, Result};
use crate::forward::{
    run_graphical, sample_initial, simulate_ensemble, simulate_time_average, DensityField, Engine,
};
use crate::gw::{estimate_alpha_gw, ProbMode};
use crate::marks::MarkStream;
use crate::model::Side;
use crate::pde::{heat_solution, solve_correlation_field, solve_discrete_density, stationary_profile, BoundaryMode, CorrBoundary, DensitySolver};
use crate::stats::{bernoulli_mean_stderr, OccupancyStats, PairSet};

/// Sine modes used for continuum references.
const HEAT_MODES: usize = 400;
/// Points of the Simpson grid used for `∫ G ρ_t du`.
const WEAK_GRID: usize = 2001;
/// Batches used for batch-means errors of pooled correlation statistics.
const CORR_BATCHES: usize = 20;
/// Family-wise level of the simultaneous correlation band.
const FAMILY_LEVEL: f64 = 1e-3;

/// Test functions of the weak statistic.
pub const TEST_FUNCTIONS: [(&str, fn(f64) -> f64); 3] = [("one", |_| 1.0), ("u", |u| u), ("sin_pi_u", |u| (PI * u).sin())];

fn simpson(values: &[f64], h: f64) -> f64 {
    let m = values.len() - 1;
    debug_assert!(m % 2 == 0);
    let mut s = values[0] + values[m];
    for (i, v) in values.iter().enumerate().take(m).skip(1) {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
    }
    s * h / 3.0
}

fn unit_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

/// `(1/(N-1)) Σ_x G(x/N) ρ̂(x) − ∫ G ρ du`, with `values[x - 1]` the
/// empirical density at site `x` and `continuum` sampled on a uniform grid
/// of `[0, 1]` with an odd number of points.
pub fn weak_statistic(values: &[f64], g: impl Fn(f64) -> f64, continuum: &[f64]) -> f64 {
    let n = values.len() + 1;
    let emp = values.iter().enumerate().map(|(i, v)| g((i + 1) as f64 / n as f64) * v).sum::<f64>() / (n - 1) as f64;
    let h = 1.0 / (continuum.len() - 1) as f64;
    let gv: Vec<f64> = continuum.iter().enumerate().map(|(i, v)| g(i as f64 * h) * v).collect();
    emp - simpson(&gv, h)
}

fn two_sided_z(level: f64, tests: usize) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(1.0 - level / (2.0 * tests.max(1) as f64))
}

/// `later <= earlier + z·σ_joint`, for values with standard errors.
fn non_increasing(name: &str, series: &[(usize, f64, f64)], z: f64) -> Vec<Check> {
    series
        .windows(2)
        .map(|w| {
            let ((n0, a, sa), (n1, b, sb)) = (w[0], w[1]);
            let joint = (sa * sa + sb * sb).sqrt();
            Check::at_most(format!("{name}_N{n1}_vs_N{n0}"), b - a, z * joint)
        })
        .collect()
}

fn density_header_rows(n: usize, t: f64, field: Option<&DensityField>, discrete: Option<&[f64]>, continuum: &[f64], stationary: &[f64]) -> Vec<DensityRow> {
    (1..n)
        .map(|x| DensityRow {
            t,
            x,
            u: x as f64 / n as f64,
            empirical: field.map(|f| f.at(x)),
            stderr: field.map(|f| f.stderr[x - 1]),
            discrete: discrete.and_then(|d| (3..=n - 3).contains(&x).then(|| d[x - 3])),
            continuum: Some(continuum[x - 1]),
            stationary: Some(stationary[x - 1]),
        })
        .collect()
}

pub fn run_hydro(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params = cfg.params()?;
    let n = params.n;
    let times = if cfg.times.is_empty() { vec![0.1] } else { cfg.times.clone() };
    let bd = params.boundary_densities();
    let stats = simulate_ensemble(&cfg.profile, &params, &times, cfg.n_samples, cfg.seed, cfg.engine, &PairSet::List(vec![]))?;
    let discrete = solve_discrete_density(&params, &cfg.profile, BoundaryMode::from_params(&params), &times, None)?;
    let sites: Vec<f64> = (1..n).map(|x| x as f64 / n as f64).collect();
    let stationary = stationary_profile(bd.alpha, bd.alpha_prime, &sites);
    let grid = unit_grid(WEAK_GRID);
    let (lo, hi) = ((0.1 * n as f64).ceil() as usize, (0.9 * n as f64).floor() as usize);

    let mut report = Report::new(ExperimentKind::Hydro, cfg, &params);
    let mut out_rows = Vec::new();
    let mut per_time = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        let field = DensityField::from_stats(t, &stats[k]);
        let cont = heat_solution(&cfg.profile, bd.alpha, bd.alpha_prime, t, &sites, HEAT_MODES)?;
        let cont_grid = heat_solution(&cfg.profile, bd.alpha, bd.alpha_prime, t, &grid, HEAT_MODES)?;
        let sup = (lo..=hi).map(|x| (field.at(x) - cont.values[x - 1]).abs()).fold(0.0, f64::max);
        let sup_discrete = (lo..=hi).map(|x| (discrete.at(k, x) - cont.values[x - 1]).abs()).fold(0.0, f64::max);
        let max_se = (lo..=hi).map(|x| field.stderr[x - 1]).fold(0.0, f64::max);
        report.checks.push(Check::at_most(format!("sup_t{t}"), sup, cfg.bands.sup));
        let mut weak = serde_json::Map::new();
        for (name, g) in TEST_FUNCTIONS {
            let w = weak_statistic(&field.values, g, &cont_grid.values);
            report.checks.push(Check::at_most(format!("weak_{name}_t{t}"), w.abs(), cfg.bands.weak));
            weak.insert(name.into(), json!(w));
        }
        per_time.push(json!({
            "t": t,
            "sup_bulk": sup,
            "sup_discrete_vs_continuum": sup_discrete,
            "max_stderr": max_se,
            "truncation_bound": cont.truncation_bound,
            "weak": weak,
            "window": [lo, hi],
        }));
        out_rows.extend(density_header_rows(n, t, Some(&field), Some(&discrete.profiles[k]), &cont.values, &stationary));
    }
    report.data = json!({ "times": per_time, "alpha": bd.alpha, "alpha_prime": bd.alpha_prime, "engine": cfg.engine });
    let mut out = RunOutput::new(report);
    out.density = out_rows;
    Ok(out)
}

pub fn run_hydrostatic(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params = cfg.params()?;
    let n = params.n;
    let bd = params.boundary_densities();
    let avg = simulate_time_average(&cfg.profile, &params, cfg.burn_in, cfg.t_end, cfg.spacing, cfg.n_samples, cfg.seed)?;
    let sites: Vec<f64> = (1..n).map(|x| x as f64 / n as f64).collect();
    let stationary = stationary_profile(bd.alpha, bd.alpha_prime, &sites);
    let diff: Vec<f64> = avg.values.iter().zip(&stationary).map(|(a, b)| a - b).collect();
    let l2 = (diff.iter().map(|d| d * d).sum::<f64>() / diff.len() as f64).sqrt();
    let sup = diff.iter().fold(0.0, |m: f64, d| m.max(d.abs()));
    let noise = (avg.stderr.iter().map(|s| s * s).sum::<f64>() / diff.len() as f64).sqrt();

    // how far the discrete equation is from its own fixed point at t_end
    let discrete = solve_discrete_density(&params, &cfg.profile, BoundaryMode::from_params(&params), &[cfg.burn_in, cfg.t_end], None)?;
    let lin = |x: usize| bd.alpha + (x - 3) as f64 / (n - 6) as f64 * (bd.alpha_prime - bd.alpha);
    let relax = |k: usize| (3..=n - 3).map(|x| (discrete.at(k, x) - lin(x)).abs()).fold(0.0, f64::max);

    let mut report = Report::new(ExperimentKind::Hydrostatic, cfg, &params);
    report.checks.push(Check::at_most("l2", l2, cfg.bands.l2));
    report.data = json!({
        "l2": l2,
        "sup": sup,
        "l2_noise": noise,
        "burn_in": cfg.burn_in,
        "t_end": cfg.t_end,
        "spacing": cfg.spacing,
        "snapshots": avg.times.len(),
        "discrete_relaxation_at_burn_in": relax(0),
        "discrete_relaxation_at_t_end": relax(1),
        "alpha": bd.alpha,
        "alpha_prime": bd.alpha_prime,
    });
    let field = DensityField {
        t: cfg.t_end,
        values: avg.values,
        stderr: avg.stderr,
        n_samples: avg.n_replicas,
    };
    let mut out = RunOutput::new(report);
    out.density = density_header_rows(n, cfg.t_end, Some(&field), Some(&discrete.profiles[1]), &stationary, &stationary);
    // the continuum column is the stationary solution here
    Ok(out)
}

pub fn run_corr(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let base = cfg.params()?;
    let t = cfg.first_time(0.1);
    let sizes = cfg.sizes(base.n);
    let mut report = Report::new(ExperimentKind::Corr, cfg, &base);
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    let mut mean_series = Vec::new();
    let per_batch = cfg.n_samples.div_ceil(CORR_BATCHES);
    for &n in &sizes {
        let params = base.with_n(n);
        params.validate()?;
        let gap = (cfg.delta * n as f64).ceil() as usize;
        let pairs = PairSet::MinGap(gap);
        let mut pooled: Option<OccupancyStats> = None;
        let mut batch_means = Vec::with_capacity(CORR_BATCHES);
        for b in 0..CORR_BATCHES {
            // disjoint replica seeds per batch
            let seed = cfg.seed.wrapping_add((b as u64) << 40);
            let s = simulate_ensemble(&cfg.profile, &params, &[t], per_batch, seed, cfg.engine, &pairs)?.remove(0);
            let m = (0..s.pairs.len()).map(|i| s.pair(i).0).sum::<f64>() / s.pairs.len().max(1) as f64;
            batch_means.push(m);
            pooled = Some(match pooled {
                None => s,
                Some(p) => p.merge(&s),
            });
        }
        let pooled = pooled.expect("at least one batch");
        let m = pooled.pairs.len();
        if m == 0 {
            return Err(Error::Config(format!("no pairs with gap >= {gap} at N = {n}")));
        }
        let est: Vec<(f64, f64)> = (0..m).map(|i| pooled.pair(i)).collect();
        let max_abs = est.iter().fold(0.0, |a: f64, e| a.max(e.0.abs()));
        let max_se = est.iter().fold(0.0, |a: f64, e| a.max(e.1));
        let z_bonf = two_sided_z(FAMILY_LEVEL, m);
        let band = z_bonf * max_se + cfg.bands.corr_margin;
        report.checks.push(Check::at_most(format!("max_abs_corr_N{n}"), max_abs, band));

        let bm: crate::stats::Moments = batch_means.iter().copied().collect();
        mean_series.push((n, bm.mean().abs(), bm.stderr()));

        let pde = DensitySolver::new(n, &cfg.profile, BoundaryMode::from_params(&params), crate::pde::default_dt(n))
            .and_then(|d| solve_correlation_field(d, cfg.delta, &[t], &CorrBoundary::Zero))
            .ok();
        let pde_at: HashMap<(usize, usize), f64> = pde
            .as_ref()
            .map(|s| s.points.iter().copied().zip(s.values[0].iter().copied()).collect())
            .unwrap_or_default();
        for (i, &(x, y)) in pooled.pairs.iter().enumerate() {
            rows.push(CorrRow {
                n,
                t,
                x,
                y,
                empirical: est[i].0,
                stderr: est[i].1,
                pde: pde_at.get(&(x, y)).copied(),
            });
        }
        per_n.push(json!({
            "n": n,
            "pairs": m,
            "min_gap": gap,
            "max_abs": max_abs,
            "max_stderr": max_se,
            "z_bonferroni": z_bonf,
            "band": band,
            "mean_corr": bm.mean(),
            "mean_corr_stderr": bm.stderr(),
            "pde_sup_abs": pde.as_ref().map(|s| s.sup_abs(0)),
        }));
    }
    report.checks.extend(non_increasing("abs_mean_corr", &mean_series, cfg.bands.z));
    report.data = json!({ "t": t, "delta": cfg.delta, "batches": CORR_BATCHES, "sizes": per_n });
    let mut out = RunOutput::new(report);
    out.corr = rows;
    Ok(out)
}

pub fn run_duality(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params = cfg.params()?;
    let n = params.n;
    let t = cfg.first_time(0.5);
    let max_nodes = DEFAULT_MAX_NODES;

    // (resolver vs replay mismatches, tree vs resolver mismatches, compared trees, failed, overflow)
    let per_seed: Vec<Result<[u64; 5]>> = (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = cfg.seed ^ i;
            let stream = MarkStream::generate(&params, t, s);
            let eta0 = sample_initial(&cfg.profile, &params, s.rotate_left(32));
            let forward = run_graphical(&eta0, &stream, t)?;
            let mut res = Resolver::new(&stream, t, &eta0)?;
            let mut c = [0u64; 5];
            for x in 1..n {
                let v = res.value(x);
                c[0] += (v != forward.get(x)) as u64;
                match determination_tree(x, t, &eta0, &stream, max_nodes)?.outcome {
                    TreeOutcome::Tree(tree) => {
                        c[2] += 1;
                        c[1] += (tree.solve()?.is_plus() != v) as u64;
                    }
                    TreeOutcome::Failed => c[3] += 1,
                    TreeOutcome::Overflow => c[4] += 1,
                }
            }
            Ok(c)
        })
        .collect();
    let mut tot = [0u64; 5];
    for c in per_seed {
        for (a, b) in tot.iter_mut().zip(c?) {
            *a += b;
        }
    }

    // with no marks, η_t = η_0
    let empty = MarkStream::from_marks(n, t, vec![]);
    let eta0 = sample_initial(&cfg.profile, &params, cfg.seed);
    let mut res = Resolver::new(&empty, t, &eta0)?;
    let identity_mismatch = (1..n).filter(|&x| res.value(x) != eta0.get(x)).count();

    // failure frequency from site 3 across lattice sizes
    let sizes = if cfg.n_values.is_empty() { vec![] } else { cfg.n_values.clone() };
    let mut fail_series = Vec::new();
    let mut fail_table = Vec::new();
    for &m in &sizes {
        let p = params.with_n(m);
        p.validate()?;
        let failed: u64 = (0..cfg.n_samples as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ i);
                let mut init_rng = ChaCha8Rng::seed_from_u64((cfg.seed ^ i).rotate_left(32));
                let mut src = LocalMarkSampler::new(&p, &mut rng);
                let run = build_determination_tree(3, m, &mut src, t, max_nodes, |x| {
                    init_rng.random::<f64>() < cfg.profile.eval(x as f64 / m as f64)
                });
                matches!(run.outcome, TreeOutcome::Failed) as u64
            })
            .sum();
        let (rate, se) = bernoulli_mean_stderr(failed, cfg.n_samples as u64);
        fail_series.push((m, rate, se));
        fail_table.push(json!({ "n": m, "failure_rate": rate, "stderr": se }));
    }

    let mut report = Report::new(ExperimentKind::Duality, cfg, &params);
    report.checks.push(Check::at_most("resolver_vs_replay_mismatches", tot[0] as f64, 0.0));
    report.checks.push(Check::at_most("tree_vs_resolver_mismatches", tot[1] as f64, 0.0));
    report.checks.push(Check::at_most("empty_stream_identity_mismatches", identity_mismatch as f64, 0.0));
    report.checks.extend(non_increasing("failure_rate", &fail_series, cfg.bands.z));
    report.data = json!({
        "t": t,
        "seeds": cfg.n_samples,
        "site_checks": cfg.n_samples * (n - 1),
        "trees_compared": tot[2],
        "trees_failed": tot[3],
        "trees_overflowed": tot[4],
        "failure_table": fail_table,
    });
    Ok(RunOutput::new(report))
}

pub fn run_gw_alpha(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params = cfg.params()?;
    let mut report = Report::new(ExperimentKind::GwAlpha, cfg, &params);
    let mut sides = Vec::new();
    for (j, side) in Side::BOTH.into_iter().enumerate() {
        let res = params.reservoir(side);
        let alpha = res.alpha();
        let seed = cfg.seed.wrapping_add((j as u64) << 48);
        let est = estimate_alpha_gw(&params, side, ProbMode::Limit, cfg.n_samples as u64, seed, DEFAULT_MAX_NODES)?;
        let name = match side {
            Side::Left => "left",
            Side::Right => "right",
        };
        let zb = cfg.bands.z * est.stderr;
        report.checks.push(Check::at_most(format!("alpha_{name}"), (est.alpha_hat - alpha).abs(), zb));
        let a = est.alpha_hat;
        let residual = res.r * (res.rho_bar - a) + res.b * a * (1.0 - a);
        // |F'| <= r + b on [0, 1]
        report.checks.push(Check::at_most(format!("fixed_point_residual_{name}"), residual.abs(), zb * (res.r + res.b)));
        let finite = match cfg.gw_mode {
            Some(ProbMode::FiniteN) => Some(estimate_alpha_gw(&params, side, ProbMode::FiniteN, cfg.n_samples as u64, seed ^ 1, DEFAULT_MAX_NODES)?),
            _ => None,
        };
        sides.push(json!({
            "side": side,
            "alpha": alpha,
            "alpha_hat": a,
            "stderr": est.stderr,
            "overflows": est.overflows,
            "residual": residual,
            "finite_n": finite,
        }));
    }
    report.data = json!({ "mode": ProbMode::Limit, "sides": sides });
    Ok(RunOutput::new(report))
}

pub fn run_dual_stats(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let base = cfg.params()?;
    let x = cfg.x.unwrap_or(3);
    let horizon = cfg.t_horizon.unwrap_or(1.0);
    let sizes = cfg.sizes(base.n);
    let mut report = Report::new(ExperimentKind::DualStats, cfg, &base);
    let (mut kappa_s, mut life_s, mut fail_s) = (Vec::new(), Vec::new(), Vec::new());
    let mut table = Vec::new();
    let mut rows = Vec::new();
    let largest = sizes.iter().copied().max().unwrap_or(base.n);
    for &n in &sizes {
        let params = base.with_n(n);
        let runs = dual_stats_runs(&params, x, horizon, cfg.n_samples, cfg.seed)?;
        let total = runs.len() as u64;
        let ln_n = (n as f64).ln();
        let t_cut = (n as f64).powf(-params.theta_hat() / 2.0);
        let count = |f: &dyn Fn(&crate::dual::DualStatsRow) -> bool| runs.iter().filter(|(r, _)| f(r)).count() as u64;
        let (pk, sk) = bernoulli_mean_stderr(count(&|r| r.kappa as f64 > ln_n), total);
        let (pl, sl) = bernoulli_mean_stderr(count(&|r| r.lifespan > t_cut), total);
        let (pf, sf) = bernoulli_mean_stderr(count(&|r| r.failed), total);
        let firsts: Vec<FirstBoundary> = runs.iter().filter_map(|(_, f)| *f).collect();
        let deaths = firsts.iter().filter(|f| **f == FirstBoundary::Death).count() as u64;
        let (pd, sd) = bernoulli_mean_stderr(deaths, firsts.len() as u64);
        let horizon_hits = count(&|r| r.hit_horizon);
        kappa_s.push((n, pk, sk));
        life_s.push((n, pl, sl));
        fail_s.push((n, pf, sf));
        if let Some(min) = cfg.bands.death_first_min {
            report.checks.push(Check::at_least(format!("death_first_N{n}"), pd, min));
        }
        table.push(json!({
            "n": n,
            "runs": total,
            "p_kappa_gt_log_n": pk, "p_kappa_stderr": sk,
            "lifespan_cut": t_cut,
            "p_lifespan_gt_cut": pl, "p_lifespan_stderr": sl,
            "failure_rate": pf, "failure_stderr": sf,
            "death_first": pd, "death_first_stderr": sd,
            "first_boundary_events": firsts.len(),
            "hit_horizon": horizon_hits,
            "mean_kappa": runs.iter().map(|(r, _)| r.kappa as f64).sum::<f64>() / total.max(1) as f64,
            "mean_max_position": runs.iter().map(|(r, _)| r.max_position as f64).sum::<f64>() / total.max(1) as f64,
        }));
        if n == largest {
            rows = runs.into_iter().map(|(r, _)| r).collect();
        }
    }
    let z = cfg.bands.z;
    report.checks.extend(non_increasing("p_kappa_gt_log_n", &kappa_s, z));
    report.checks.extend(non_increasing("p_lifespan_gt_cut", &life_s, z));
    report.checks.extend(non_increasing("failure_rate", &fail_s, z));
    report.data = json!({ "x": x, "t_horizon": horizon, "rows_for_n": largest, "sizes": table });
    let mut out = RunOutput::new(report);
    out.dual_stats = rows;
    Ok(out)
}

pub fn run_engines_equal(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params = cfg.params()?;
    let n = params.n;
    let t = cfg.first_time(0.5);
    let run = |engine: Engine, seed: u64| simulate_ensemble(&cfg.profile, &params, &[t], cfg.n_samples, seed, engine, &PairSet::All).map(|mut v| v.remove(0));
    let g = run(Engine::Gillespie, cfg.seed)?;
    let h = run(Engine::Graphical, cfg.seed.rotate_left(32) ^ 0x9e37_79b9)?;
    let z = |(a, sa): (f64, f64), (b, sb): (f64, f64)| {
        let s = (sa * sa + sb * sb).sqrt();
        if s == 0.0 {
            if a == b { 0.0 } else { f64::INFINITY }
        } else {
            (a - b) / s
        }
    };
    let site_z: Vec<f64> = (1..n).map(|x| z(g.site(x), h.site(x))).collect();
    let pair_z: Vec<f64> = (0..g.pairs.len()).map(|i| z(g.pair(i), h.pair(i))).collect();
    let max_site = site_z.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let max_pair = pair_z.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let mut report = Report::new(ExperimentKind::EnginesEqual, cfg, &params);
    report.checks.push(Check::at_most("max_abs_z_site_means", max_site, cfg.bands.z));
    report.checks.push(Check::at_most("max_abs_z_pair_covariances", max_pair, cfg.bands.z));
    report.data = json!({ "t": t, "site_z": site_z, "pair_z": pair_z });
    let mut out = RunOutput::new(report);
    let gf = DensityField::from_stats(t, &g);
    let hf = DensityField::from_stats(t, &h);
    out.density = (1..n)
        .map(|x| DensityRow {
            t,
            x,
            u: x as f64 / n as f64,
            empirical: Some(gf.at(x)),
            stderr: Some(gf.stderr[x - 1]),
            discrete: Some(hf.at(x)),
            continuum: None,
            stationary: None,
        })
        .collect();
    out.corr = g
        .pairs
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| CorrRow {
            n,
            t,
            x,
            y,
            empirical: g.pair(i).0,
            stderr: g.pair(i).1,
            pde: None,
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::InitialProfile;
    use crate::model::{ModelParams, Reservoir};

    fn params(n: usize) -> ModelParams {
        ModelParams::new(n, 0.5, Reservoir::new(1.0, 0.2, 0.5, 0.3), Reservoir::new(1.0, 0.9, 0.5, 0.3)).unwrap()
    }

    #[test]
    fn weak_statistic_with_unit_test_function_is_average_difference() {
        let n = 50;
        let vals: Vec<f64> = (1..n).map(|x| 0.3 + 0.002 * x as f64).collect();
        let cont = vec![0.4; WEAK_GRID];
        let w = weak_statistic(&vals, |_| 1.0, &cont);
        let avg = vals.iter().map(|v| v - 0.4).sum::<f64>() / (n - 1) as f64;
        assert!((w - avg).abs() < 1e-12);
    }

    #[test]
    fn simpson_exact_on_cubic() {
        let g = unit_grid(11);
        let v: Vec<f64> = g.iter().map(|u| u * u * u).collect();
        assert!((simpson(&v, 0.1) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn bonferroni_z() {
        assert!((two_sided_z(0.05, 1) - 1.959_964).abs() < 1e-5);
        assert!(two_sided_z(1e-3, 10_000) > 5.0);
    }

    #[test]
    fn hydro_flat_stationary_start_is_at_noise_floor() {
        // α = α' and f0 = ρ*: nothing moves on average
        let p = ModelParams::new(40, 0.5, Reservoir::new(1.0, 0.5, 0.5, 0.3), Reservoir::new(1.0, 0.5, 0.5, 0.3)).unwrap();
        let a = p.boundary_densities().alpha;
        let mut cfg = ExperimentConfig::new(p);
        cfg.profile = InitialProfile::constant(a);
        cfg.times = vec![0.05];
        cfg.n_samples = 400;
        let out = run_hydro(&cfg).unwrap();
        let d = &out.report.data["times"][0];
        let (sup, se) = (d["sup_bulk"].as_f64().unwrap(), d["max_stderr"].as_f64().unwrap());
        assert!(sup < 4.5 * se, "{sup} vs {se}");
        assert!(d["sup_discrete_vs_continuum"].as_f64().unwrap() < 1e-9);
        assert_eq!(out.density.len(), 39);
    }

    #[test]
    fn reports_reproduce_bit_identically() {
        let mut cfg = ExperimentConfig::new(params(12));
        cfg.times = vec![0.05];
        cfg.n_samples = 50;
        cfg.seed = 9;
        let a = serde_json::to_string(&run_duality(&cfg).unwrap().report).unwrap();
        let b = serde_json::to_string(&run_duality(&cfg).unwrap().report).unwrap();
        assert_eq!(a, b);
        let a = run_engines_equal(&cfg).unwrap();
        let b = run_engines_equal(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duality_small_run_has_no_mismatch() {
        let mut cfg = ExperimentConfig::new(params(8));
        cfg.n_samples = 300;
        cfg.n_values = vec![10, 20];
        let out = run_duality(&cfg).unwrap();
        assert_eq!(out.report.check("resolver_vs_replay_mismatches").unwrap().value, 0.0);
        assert_eq!(out.report.check("tree_vs_resolver_mismatches").unwrap().value, 0.0);
        assert_eq!(out.report.check("empty_stream_identity_mismatches").unwrap().value, 0.0);
    }

    #[test]
    fn dual_stats_rows_and_checks() {
        let mut cfg = ExperimentConfig::new(params(20));
        cfg.n_samples = 200;
        cfg.n_values = vec![20, 40];
        let out = run_dual_stats(&cfg).unwrap();
        assert_eq!(out.dual_stats.len(), 200);
        assert_eq!(out.report.checks.len(), 3);
    }

    #[test]
    fn write_creates_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(params(8));
        cfg.n_samples = 100;
        let out = run_engines_equal(&cfg).unwrap();
        out.write(dir.path()).unwrap();
        for f in ["density.csv", "corr.csv", "summary.json"] {
            let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
            assert!(!text.is_empty());
            if f.ends_with(".csv") {
                let first = text.lines().next().unwrap();
                assert!(first.starts_with("# {") && first.contains("\"seed\""));
            }
        }
        assert!(!dir.path().join("dual_stats.csv").exists());
    }
}
