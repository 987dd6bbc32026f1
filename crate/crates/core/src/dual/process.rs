use serde::{Deserialize, Serialize};

use super::{DualMarkSource, FlagEvent, FlagSet};

/// First event that changed the number of flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstBoundary {
    Death,
    Branch,
    Merge,
}

/// Summary of one run of the branching flag process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualStats {
    /// Labels used up to the stopping time.
    pub kappa: u32,
    /// Extinction time, or `t_end` if the set survived.
    pub lifespan: f64,
    /// Rightmost site any flag visited.
    pub max_position: usize,
    /// A copy mark fired with both boundary sites of one side flagged.
    pub failed: bool,
    pub hit_horizon: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_boundary: Option<FirstBoundary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagSnapshot {
    pub time: f64,
    /// `(label, site)` sorted by site.
    pub flags: Vec<(u32, usize)>,
}

#[derive(Debug, Clone)]
pub struct FlagRun {
    pub stats: DualStats,
    /// Initial state plus one snapshot per change; empty unless recording.
    pub trajectory: Vec<FlagSnapshot>,
    pub final_set: FlagSet,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dynamics {
    Branching,
    Frozen,
}

/// Core loop. `observe` sees every effective event with the set after the
/// event and may stop the run by returning `false`.
pub(crate) fn drive(
    flags: &mut FlagSet,
    source: &mut impl DualMarkSource,
    t_end: f64,
    dynamics: Dynamics,
    mut observe: impl FnMut(f64, &FlagEvent, &FlagSet) -> bool,
) -> DualStats {
    let mut stats = DualStats {
        kappa: 0,
        lifespan: t_end,
        max_position: flags.max_site().unwrap_or(0),
        failed: false,
        hit_horizon: true,
        first_boundary: None,
    };
    while !flags.is_empty() {
        let Some(m) = source.next_mark(flags, t_end) else { break };
        let ev = match dynamics {
            Dynamics::Branching => flags.apply(m.kind),
            Dynamics::Frozen => flags.apply_frozen(m.kind),
        };
        if ev == FlagEvent::None {
            continue;
        }
        if let Some(s) = flags.max_site() {
            stats.max_position = stats.max_position.max(s);
        }
        if stats.first_boundary.is_none() {
            stats.first_boundary = match ev {
                FlagEvent::Death { .. } => Some(FirstBoundary::Death),
                FlagEvent::Branch { .. } => Some(FirstBoundary::Branch),
                FlagEvent::CopyMerge { .. } => Some(FirstBoundary::Merge),
                _ => None,
            };
        }
        if matches!(ev, FlagEvent::CopyMerge { .. }) {
            stats.failed = true;
        }
        let keep_going = observe(m.time, &ev, flags);
        if flags.is_empty() {
            stats.lifespan = m.time;
            stats.hit_horizon = false;
        }
        if !keep_going {
            stats.lifespan = m.time;
            stats.hit_horizon = false;
            break;
        }
    }
    stats.kappa = flags.next_label() - 1;
    stats
}

fn run(a0: FlagSet, source: &mut impl DualMarkSource, t_end: f64, record: bool, dynamics: Dynamics) -> FlagRun {
    let mut flags = a0;
    let mut trajectory = Vec::new();
    if record {
        trajectory.push(FlagSnapshot {
            time: 0.0,
            flags: flags.sorted(),
        });
    }
    let stats = drive(&mut flags, source, t_end, dynamics, |time, _, f| {
        if record {
            trajectory.push(FlagSnapshot { time, flags: f.sorted() });
        }
        true
    });
    FlagRun {
        stats,
        trajectory,
        final_set: flags,
    }
}

/// Evolve the branching flag process from `a0` up to `min(t_end, T)`.
pub fn run_flag_process(a0: FlagSet, source: &mut impl DualMarkSource, t_end: f64, record: bool) -> FlagRun {
    run(a0, source, t_end, record, Dynamics::Branching)
}

/// Evolve the flag-conserving process (no deaths, no branching; copy marks
/// with both boundary sites flagged switch the flags).
pub fn run_frozen_flag_process(a0: FlagSet, source: &mut impl DualMarkSource, t_end: f64, record: bool) -> FlagRun {
    run(a0, source, t_end, record, Dynamics::Frozen)
}

/// Statistics of the branching flag process started from `{x}`.
pub fn dual_statistics(x: usize, n: usize, source: &mut impl DualMarkSource, t_horizon: f64) -> DualStats {
    run_flag_process(FlagSet::singleton(n, x), source, t_horizon, false).stats
}
