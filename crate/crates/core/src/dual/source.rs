use rand::Rng;
use rand_distr::Exp1;

use super::FlagSet;
use crate::marks::{Mark, MarkKind};
use crate::model::{ModelParams, Side};

/// Supplies the marks that drive a flag process, in increasing dual time.
pub trait DualMarkSource {
    /// Next mark with time `< t_end` that can affect `flags`, or `None` once
    /// no such mark remains.
    fn next_mark(&mut self, flags: &FlagSet, t_end: f64) -> Option<Mark>;
}

/// Reads a forward stream as-is.
pub struct StreamSource<'a> {
    marks: &'a [Mark],
    idx: usize,
}

impl<'a> StreamSource<'a> {
    pub fn new(marks: &'a [Mark]) -> Self {
        StreamSource { marks, idx: 0 }
    }
}

impl DualMarkSource for StreamSource<'_> {
    fn next_mark(&mut self, flags: &FlagSet, t_end: f64) -> Option<Mark> {
        while let Some(m) = self.marks.get(self.idx) {
            if m.time >= t_end {
                return None;
            }
            self.idx += 1;
            if flags.is_affected_by(m.kind) {
                return Some(*m);
            }
        }
        None
    }
}

/// Reads the marks of `[0, t]` backward, at dual time `t - time`. Driving a
/// flag process with this source tracks the sites on which `η_t(x)` depends.
pub struct ReversedSource<'a> {
    marks: &'a [Mark],
    /// Number of marks not yet consumed (taken from the back).
    left: usize,
    t: f64,
}

impl<'a> ReversedSource<'a> {
    pub fn new(marks: &'a [Mark], t: f64) -> Self {
        let left = marks.partition_point(|m| m.time <= t);
        ReversedSource { marks, left, t }
    }
}

impl DualMarkSource for ReversedSource<'_> {
    fn next_mark(&mut self, flags: &FlagSet, t_end: f64) -> Option<Mark> {
        while self.left > 0 {
            let m = self.marks[self.left - 1];
            let s = self.t - m.time;
            if s >= t_end {
                return None;
            }
            self.left -= 1;
            if flags.is_affected_by(m.kind) {
                return Some(Mark { time: s, kind: m.kind });
            }
        }
        None
    }
}

/// Samples only the Poisson components that can act on the current flags.
///
/// By the memoryless property this has the same law as filtering a full
/// stream, at a cost proportional to the number of relevant marks rather
/// than to `N² t`.
pub struct LocalMarkSampler<R> {
    rates: Vec<(MarkKind, f64)>,
    time: f64,
    rng: R,
    buf: Vec<(MarkKind, f64)>,
}

impl<R: Rng> LocalMarkSampler<R> {
    pub fn new(params: &ModelParams, rng: R) -> Self {
        let n = params.n;
        let rates = (0..n + 6)
            .map(|c| {
                let k = MarkKind::from_component(n, c);
                (k, k.intensity(params))
            })
            .collect();
        LocalMarkSampler {
            rates,
            time: 0.0,
            rng,
            buf: Vec::with_capacity(16),
        }
    }

    fn rate(&self, kind: MarkKind, n: usize) -> f64 {
        self.rates[kind.component(n)].1
    }
}

impl<R: Rng> DualMarkSource for LocalMarkSampler<R> {
    fn next_mark(&mut self, flags: &FlagSet, t_end: f64) -> Option<Mark> {
        let n = flags.n();
        let mut buf = std::mem::take(&mut self.buf);
        buf.clear();
        for (_, s) in flags.iter() {
            // each bond once: the right bond always, the left one only if
            // its left end is not itself flagged
            if s <= n - 2 {
                buf.push((MarkKind::Exchange(s), 0.0));
            }
            if s >= 2 && !flags.contains(s - 1) {
                buf.push((MarkKind::Exchange(s - 1), 0.0));
            }
        }
        for side in Side::BOTH {
            let (outer, inner) = match side {
                Side::Left => (1, 2),
                Side::Right => (n - 1, n - 2),
            };
            if flags.contains(outer) {
                buf.push((MarkKind::Plus(side), 0.0));
                buf.push((MarkKind::Minus(side), 0.0));
            }
            if flags.contains(inner) {
                buf.push((MarkKind::Copy(side), 0.0));
                buf.push((MarkKind::Branch(side), 0.0));
            }
        }
        let mut total = 0.0;
        for e in buf.iter_mut() {
            e.1 = self.rate(e.0, n);
            total += e.1;
        }
        let out = if total <= 0.0 {
            self.time = t_end;
            None
        } else {
            self.time += self.rng.sample::<f64, _>(Exp1) / total;
            if self.time >= t_end {
                self.time = t_end;
                None
            } else {
                let mut u = self.rng.random::<f64>() * total;
                let mut pick = buf[buf.len() - 1].0;
                for &(k, r) in &buf {
                    if u < r {
                        pick = k;
                        break;
                    }
                    u -= r;
                }
                Some(Mark {
                    time: self.time,
                    kind: pick,
                })
            }
        };
        self.buf = buf;
        out
    }
}
