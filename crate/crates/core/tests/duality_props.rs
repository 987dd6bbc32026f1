use proptest::prelude::*;
use ssep_core::dual::{determination_tree, dual_stats_runs, resolve_site, run_flag_process, run_frozen_flag_process, FlagSet, StreamSource, TreeOutcome};
use ssep_core::forward::{run_graphical, sample_initial, InitialProfile};
use ssep_core::marks::MarkStream;
use ssep_core::stats::bernoulli_mean_stderr;
use ssep_core::{ModelParams, Reservoir};

fn params(n: usize, c: f64) -> ModelParams {
    ModelParams::new(n, 0.5, Reservoir::new(1.0, 0.2, 0.5, c), Reservoir::new(1.0, 0.9, 0.5, c)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resolver_and_tree_match_forward_replay(n in 5usize..14, seed in any::<u64>(), t in 0.0..0.6f64, rho in 0.0..1.0f64) {
        let p = params(n, 0.3);
        let stream = MarkStream::generate(&p, t, seed);
        let eta0 = sample_initial(&InitialProfile::constant(rho), &p, seed.rotate_left(7));
        let fwd = run_graphical(&eta0, &stream, t).unwrap();
        for x in 1..n {
            let v = resolve_site(x, t, &eta0, &stream).unwrap();
            prop_assert_eq!(v, fwd.get(x));
            if let TreeOutcome::Tree(tree) = determination_tree(x, t, &eta0, &stream, 100_000).unwrap().outcome {
                tree.validate().unwrap();
                prop_assert_eq!(tree.solve().unwrap().is_plus(), v);
            }
        }
    }

    #[test]
    fn frozen_process_conserves_flags(n in 6usize..20, seed in any::<u64>(), k in 1usize..4) {
        let p = params(n, 0.3);
        let stream = MarkStream::generate(&p, 0.2, seed);
        let sites: Vec<usize> = (0..k).map(|i| 3 + i).collect();
        let run = run_frozen_flag_process(FlagSet::from_sites(n, &sites), &mut StreamSource::new(&stream.marks), 0.2, true);
        prop_assert!(run.trajectory.iter().all(|s| s.flags.len() == k));
        prop_assert_eq!(run.final_set.len(), k);
    }

    #[test]
    fn flag_count_moves_by_one(n in 6usize..20, seed in any::<u64>()) {
        let p = params(n, 0.3);
        let stream = MarkStream::generate(&p, 0.3, seed);
        let run = run_flag_process(FlagSet::singleton(n, 3), &mut StreamSource::new(&stream.marks), 0.3, true);
        let sizes: Vec<usize> = run.trajectory.iter().map(|s| s.flags.len()).collect();
        prop_assert!(sizes.windows(2).all(|w| w[0].abs_diff(w[1]) <= 1));
        let births = sizes.windows(2).filter(|w| w[1] == w[0] + 1).count() as u32;
        if !run.stats.failed {
            prop_assert_eq!(run.stats.kappa, 1 + births);
        }
    }
}

#[test]
fn dies_before_unit_horizon_at_n200() {
    let runs = dual_stats_runs(&params(200, 0.3), 3, 1.0, 20_000, 31).unwrap();
    let alive = runs.iter().filter(|(r, _)| r.hit_horizon).count();
    assert!((alive as f64) < 0.01 * runs.len() as f64, "{alive} of {} survived", runs.len());
}

#[test]
fn failure_frequency_small_and_decreasing() {
    // with c = 0.3 the N = 200 rate is about 4%; the copy rate drives it
    let mut prev: Option<(f64, f64)> = None;
    for n in [50, 100, 200] {
        let runs = dual_stats_runs(&params(n, 0.05), 3, 1.0, 20_000, 77).unwrap();
        let failed = runs.iter().filter(|(r, _)| r.failed).count() as u64;
        let (rate, se) = bernoulli_mean_stderr(failed, runs.len() as u64);
        if n == 200 {
            assert!(rate < 0.01, "N=200 failure rate {rate}");
        }
        if let Some((r0, s0)) = prev {
            assert!(rate <= r0 + 4.0 * (se * se + s0 * s0).sqrt(), "N={n}: {rate} after {r0}");
        }
        prev = Some((rate, se));
    }
}
