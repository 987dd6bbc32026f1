//! Dual flag process, determination trees and backward resolution.
//!
//! A flag marks a site whose value at time 0 is still needed to determine
//! `η_t(x)`. Reading the marks of `[0, t]` backward turns the set of flags
//! into a forward-running branching process; recording its boundary events
//! gives a tree whose solved root is `η_t(x)`.

mod flags;
mod process;
mod resolve;
mod source;
mod tree;

use std::io::Write;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use flags::{FlagEvent, FlagSet};
pub use process::{dual_statistics, run_flag_process, run_frozen_flag_process, DualStats, FirstBoundary, FlagRun, FlagSnapshot};
pub use resolve::{resolve_site, Resolver};
pub use source::{DualMarkSource, LocalMarkSampler, ReversedSource, StreamSource};
pub use tree::{build_determination_tree, DeterminationTree, Node, NodeLabel, Sign, TreeOutcome, TreeRun};

use crate::error::{Error, Result};
use crate::marks::MarkStream;
use crate::model::{Configuration, ModelParams};

pub const DEFAULT_MAX_NODES: usize = 100_000;

/// Determination tree of `η_t(x)` for the given stream and initial
/// configuration, built from the marks of `[0, t]` read backward.
pub fn determination_tree(x: usize, t: f64, eta0: &Configuration, stream: &MarkStream, max_nodes: usize) -> Result<TreeRun> {
    if t > stream.horizon {
        return Err(Error::HorizonExceeded {
            requested: t,
            horizon: stream.horizon,
        });
    }
    if !(1..stream.n).contains(&x) {
        return Err(Error::Index { index: x, n: stream.n });
    }
    let mut src = ReversedSource::new(&stream.marks, t);
    Ok(build_determination_tree(x, stream.n, &mut src, t, max_nodes, |s| eta0.get(s)))
}

/// One row of the dual statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualStatsRow {
    pub seed: u64,
    pub x: usize,
    pub kappa: u32,
    pub lifespan: f64,
    pub max_position: usize,
    pub failed: bool,
    pub hit_horizon: bool,
}

/// Independent runs of the flag process from `{x}`; run `i` uses seed
/// `seed ^ i`.
pub fn dual_stats_runs(params: &ModelParams, x: usize, t_horizon: f64, n_runs: usize, seed: u64) -> Result<Vec<(DualStatsRow, Option<FirstBoundary>)>> {
    params.validate()?;
    if !(1..params.n).contains(&x) {
        return Err(Error::Index { index: x, n: params.n });
    }
    Ok((0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed ^ i;
            let mut src = LocalMarkSampler::new(params, ChaCha8Rng::seed_from_u64(s));
            let st = dual_statistics(x, params.n, &mut src, t_horizon);
            (
                DualStatsRow {
                    seed: s,
                    x,
                    kappa: st.kappa,
                    lifespan: st.lifespan,
                    max_position: st.max_position,
                    failed: st.failed,
                    hit_horizon: st.hit_horizon,
                },
                st.first_boundary,
            )
        })
        .collect())
}

/// Write rows as CSV, preceded by one `# {json}` header line.
pub fn write_dual_stats_csv(mut w: impl Write, header: &serde_json::Value, rows: &[DualStatsRow]) -> Result<()> {
    writeln!(w, "# {header}")?;
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}
