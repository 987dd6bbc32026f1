//! Event-driven simulation with active-bond bookkeeping.
//!
//! Only bonds whose endpoints differ are eligible to fire; they live in an
//! indexed set so that selecting, inserting and removing are all `O(1)`.

use rand::Rng;
use rand_distr::Exp1;

use crate::model::{side_flip_rates, Configuration, ModelParams, Side};

const NONE: usize = usize::MAX;

pub struct GillespieEngine<'p, R> {
    params: &'p ModelParams,
    eta: Configuration,
    /// Left sites of active bonds.
    active: Vec<usize>,
    /// Position of bond `x` in `active`, or `NONE`.
    slot: Vec<usize>,
    time: f64,
    events: u64,
    rng: R,
}

impl<'p, R: Rng> GillespieEngine<'p, R> {
    pub fn new(params: &'p ModelParams, eta0: Configuration, rng: R) -> Self {
        let n = params.n;
        let mut engine = GillespieEngine {
            params,
            eta: eta0,
            active: Vec::with_capacity(n),
            slot: vec![NONE; n],
            time: 0.0,
            events: 0,
            rng,
        };
        for x in 1..=n - 2 {
            engine.refresh_bond(x);
        }
        engine
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> &Configuration {
        &self.eta
    }

    pub fn into_state(self) -> Configuration {
        self.eta
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    #[inline]
    fn refresh_bond(&mut self, x: usize) {
        if x < 1 || x > self.params.n - 2 {
            return;
        }
        let occ = self.eta.raw();
        let is_active = occ[x - 1] != occ[x];
        let slot = self.slot[x];
        match (is_active, slot != NONE) {
            (true, false) => {
                self.slot[x] = self.active.len();
                self.active.push(x);
            }
            (false, true) => {
                let last = *self.active.last().unwrap();
                self.active.swap_remove(slot);
                if last != x {
                    self.slot[last] = slot;
                }
                self.slot[x] = NONE;
            }
            _ => {}
        }
    }

    #[inline]
    fn flip(&mut self, x: usize) {
        self.eta.raw_mut()[x - 1] ^= 1;
        self.refresh_bond(x - 1);
        self.refresh_bond(x);
    }

    /// Run until `t_end`; the state is then a sample of `η_{t_end}`.
    pub fn advance_to(&mut self, t_end: f64) {
        let n = self.params.n;
        let bulk = self.params.bulk_rate();
        let scale = self.params.boundary_scale();
        let left = self.params.reservoir(Side::Left);
        let right = self.params.reservoir(Side::Right);
        while self.time < t_end {
            let occ = self.eta.raw();
            let (l1, l2) = side_flip_rates(&left, occ[0] != 0, occ[1] != 0);
            let (r1, r2) = side_flip_rates(&right, occ[n - 2] != 0, occ[n - 3] != 0);
            let bulk_total = bulk * self.active.len() as f64;
            let total = bulk_total + scale * (l1 + l2 + r1 + r2);
            if total <= 0.0 {
                self.time = t_end;
                break;
            }
            let dt: f64 = self.rng.sample::<f64, _>(Exp1) / total;
            if self.time + dt >= t_end {
                self.time = t_end;
                break;
            }
            self.time += dt;
            self.events += 1;
            let u = self.rng.random::<f64>() * total;
            if u < bulk_total {
                let i = ((u / bulk) as usize).min(self.active.len() - 1);
                let x = self.active[i];
                self.eta.raw_mut().swap(x - 1, x);
                self.refresh_bond(x - 1);
                self.refresh_bond(x + 1);
            } else {
                let mut v = (u - bulk_total) / scale;
                let site = if v < l1 {
                    1
                } else {
                    v -= l1;
                    if v < l2 {
                        2
                    } else {
                        v -= l2;
                        if v < r1 {
                            n - 1
                        } else {
                            n - 2
                        }
                    }
                };
                self.flip(site);
            }
        }
    }
}
