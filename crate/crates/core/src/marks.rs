//! Poisson mark streams of the graphical construction.
//!
//! There are `N + 6` independent components: one exchange clock per bulk
//! bond and, on each side, a `+`, `-`, copy and branch process. Each
//! component owns its own ChaCha stream keyed by `(seed, component)`, so any
//! subset of components replays identically whether or not the others are
//! generated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{Read, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Side};

/// What a mark does. The derived order (exchange, +, -, copy, branch; then
/// position / left before right) is the tie-break for equal times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MarkKind {
    /// Swap sites `x` and `x + 1`.
    Exchange(usize),
    /// Put a particle on the outer boundary site.
    Plus(Side),
    /// Empty the outer boundary site.
    Minus(Side),
    /// Inner site copies the outer site.
    Copy(Side),
    /// Inner site is filled if the outer site is occupied.
    Branch(Side),
}

impl MarkKind {
    /// Component index in `0..N+6`, ordered like the enum.
    pub fn component(&self, n: usize) -> usize {
        let side = |s: &Side| match s {
            Side::Left => 0,
            Side::Right => 1,
        };
        let base = n - 2;
        match self {
            MarkKind::Exchange(x) => x - 1,
            MarkKind::Plus(s) => base + side(s),
            MarkKind::Minus(s) => base + 2 + side(s),
            MarkKind::Copy(s) => base + 4 + side(s),
            MarkKind::Branch(s) => base + 6 + side(s),
        }
    }

    pub fn from_component(n: usize, comp: usize) -> MarkKind {
        let base = n - 2;
        if comp < base {
            return MarkKind::Exchange(comp + 1);
        }
        let k = comp - base;
        let side = if k % 2 == 0 { Side::Left } else { Side::Right };
        match k / 2 {
            0 => MarkKind::Plus(side),
            1 => MarkKind::Minus(side),
            2 => MarkKind::Copy(side),
            _ => MarkKind::Branch(side),
        }
    }

    /// Poisson intensity of this component.
    pub fn intensity(&self, params: &ModelParams) -> f64 {
        let scale = params.boundary_scale();
        match self {
            MarkKind::Exchange(_) => params.bulk_rate(),
            MarkKind::Plus(s) => {
                let res = params.reservoir(*s);
                scale * res.r * res.rho_bar
            }
            MarkKind::Minus(s) => {
                let res = params.reservoir(*s);
                scale * res.r * (1.0 - res.rho_bar)
            }
            MarkKind::Copy(s) => scale * params.reservoir(*s).c,
            MarkKind::Branch(s) => scale * params.reservoir(*s).b,
        }
    }

    fn code(&self) -> u8 {
        match self {
            MarkKind::Exchange(_) => 0,
            MarkKind::Plus(_) => 1,
            MarkKind::Minus(_) => 2,
            MarkKind::Copy(_) => 3,
            MarkKind::Branch(_) => 4,
        }
    }

    /// Site recorded in the binary dump: the bond's left site, the outer
    /// site for `±`, the inner site for copy and branch.
    fn position(&self, n: usize) -> usize {
        match self {
            MarkKind::Exchange(x) => *x,
            MarkKind::Plus(s) | MarkKind::Minus(s) => match s {
                Side::Left => 1,
                Side::Right => n - 1,
            },
            MarkKind::Copy(s) | MarkKind::Branch(s) => match s {
                Side::Left => 2,
                Side::Right => n - 2,
            },
        }
    }

    fn decode(code: u8, pos: usize, n: usize) -> Result<MarkKind> {
        let side = |outer: bool| -> Result<Side> {
            let (l, r) = if outer { (1, n - 1) } else { (2, n - 2) };
            if pos == l {
                Ok(Side::Left)
            } else if pos == r {
                Ok(Side::Right)
            } else {
                Err(Error::Index { index: pos, n })
            }
        };
        Ok(match code {
            0 if (1..=n - 2).contains(&pos) => MarkKind::Exchange(pos),
            0 => return Err(Error::Index { index: pos, n }),
            1 => MarkKind::Plus(side(true)?),
            2 => MarkKind::Minus(side(true)?),
            3 => MarkKind::Copy(side(false)?),
            4 => MarkKind::Branch(side(false)?),
            c => return Err(Error::Config(format!("unknown mark code {c}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mark {
    pub time: f64,
    pub kind: MarkKind,
}

/// Total order on marks: time, then kind.
fn mark_cmp(a: &Mark, b: &Mark) -> Ordering {
    a.time.total_cmp(&b.time).then_with(|| a.kind.cmp(&b.kind))
}

/// Derive the per-component generator. ChaCha has 2^64 streams per key, one
/// per component.
pub(crate) fn component_rng(seed: u64, component: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(component as u64);
    rng
}

struct Cursor {
    next: f64,
    comp: usize,
    rate: f64,
    rng: ChaCha8Rng,
}

impl Cursor {
    fn new(seed: u64, comp: usize, rate: f64) -> Self {
        let mut rng = component_rng(seed, comp);
        let next = rng.sample::<f64, _>(Exp1) / rate;
        Cursor { next, comp, rate, rng }
    }

    fn advance(&mut self) {
        self.next += self.rng.sample::<f64, _>(Exp1) / self.rate;
    }
}

impl PartialEq for Cursor {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cursor {}
impl PartialOrd for Cursor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cursor {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .next
            .total_cmp(&self.next)
            .then_with(|| other.comp.cmp(&self.comp))
    }
}

/// Lazy, time-ordered superposition of the component processes on
/// `[0, horizon)`.
pub struct MarkGenerator {
    n: usize,
    horizon: f64,
    heap: BinaryHeap<Cursor>,
}

impl MarkGenerator {
    pub fn new(params: &ModelParams, horizon: f64, seed: u64) -> Self {
        Self::with_filter(params, horizon, seed, |_| true)
    }

    /// Generate only the components accepted by `keep`.
    pub fn with_filter(params: &ModelParams, horizon: f64, seed: u64, keep: impl Fn(MarkKind) -> bool) -> Self {
        let n = params.n;
        let mut heap = BinaryHeap::with_capacity(n + 6);
        if horizon > 0.0 {
            for comp in 0..n + 6 {
                let kind = MarkKind::from_component(n, comp);
                let rate = kind.intensity(params);
                if rate > 0.0 && keep(kind) {
                    heap.push(Cursor::new(seed, comp, rate));
                }
            }
        }
        MarkGenerator { n, horizon, heap }
    }
}

impl Iterator for MarkGenerator {
    type Item = Mark;

    fn next(&mut self) -> Option<Mark> {
        let mut top = self.heap.peek_mut()?;
        if top.next >= self.horizon {
            return None;
        }
        let mark = Mark {
            time: top.next,
            kind: MarkKind::from_component(self.n, top.comp),
        };
        top.advance();
        Some(mark)
    }
}

/// A materialized, time-ascending mark sequence on `[0, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkStream {
    pub n: usize,
    pub horizon: f64,
    pub seed: u64,
    pub marks: Vec<Mark>,
}

impl MarkStream {
    pub fn generate(params: &ModelParams, horizon: f64, seed: u64) -> MarkStream {
        MarkStream {
            n: params.n,
            horizon: horizon.max(0.0),
            seed,
            marks: MarkGenerator::new(params, horizon, seed).collect(),
        }
    }

    /// Stream with hand-picked marks, sorted into canonical order.
    pub fn from_marks(n: usize, horizon: f64, mut marks: Vec<Mark>) -> MarkStream {
        marks.sort_by(mark_cmp);
        MarkStream { n, horizon, seed: 0, marks }
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Mark> {
        self.marks.iter()
    }

    /// Marks with time in `[t0, t1)`, order preserved.
    pub fn restrict(&self, t0: f64, t1: f64) -> Result<MarkStream> {
        if !(0.0 <= t0 && t0 <= t1 && t1 <= self.horizon) {
            return Err(Error::Window {
                t0,
                t1,
                horizon: self.horizon,
            });
        }
        let lo = self.marks.partition_point(|m| m.time < t0);
        let hi = self.marks.partition_point(|m| m.time < t1);
        Ok(MarkStream {
            n: self.n,
            horizon: self.horizon,
            seed: self.seed,
            marks: self.marks[lo..hi].to_vec(),
        })
    }

    /// Number of marks with time `<= t`.
    pub fn count_until(&self, t: f64) -> usize {
        self.marks.partition_point(|m| m.time <= t)
    }

    /// Little-endian records: `f64` time, `u8` kind, `u16` position.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let mut buf = Vec::with_capacity(self.marks.len() * 11);
        for m in &self.marks {
            buf.extend_from_slice(&m.time.to_le_bytes());
            buf.push(m.kind.code());
            buf.extend_from_slice(&(m.kind.position(self.n) as u16).to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(mut r: impl Read, n: usize, horizon: f64) -> Result<MarkStream> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() % 11 != 0 {
            return Err(Error::Config(format!("mark dump length {} is not a multiple of 11", buf.len())));
        }
        let marks = buf
            .chunks_exact(11)
            .map(|rec| {
                let time = f64::from_le_bytes(rec[0..8].try_into().unwrap());
                let pos = u16::from_le_bytes([rec[9], rec[10]]) as usize;
                Ok(Mark {
                    time,
                    kind: MarkKind::decode(rec[8], pos, n)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MarkStream {
            n,
            horizon,
            seed: 0,
            marks,
        })
    }
}

impl<'a> IntoIterator for &'a MarkStream {
    type Item = &'a Mark;
    type IntoIter = std::slice::Iter<'a, Mark>;

    fn into_iter(self) -> Self::IntoIter {
        self.marks.iter()
    }
}
