use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::marks::{Mark, MarkKind, MarkStream};
use crate::model::{Configuration, Side};

/// Backward evaluation of `η_t(x)` from `η_0` and a stream, one site at a
/// time. Only marks touching the queried site are visited; intermediate
/// values are memoized on `(site, number of marks applied)`.
pub struct Resolver<'a> {
    marks: &'a [Mark],
    eta0: &'a Configuration,
    /// Indices of the marks that can change each site.
    touching: Vec<Vec<usize>>,
    memo: HashMap<(usize, usize), bool>,
}

fn outer_inner(n: usize, side: Side) -> (usize, usize) {
    match side {
        Side::Left => (1, 2),
        Side::Right => (n - 1, n - 2),
    }
}

impl<'a> Resolver<'a> {
    /// Resolver for time `t`: the marks with time `<= t` are in effect.
    pub fn new(stream: &'a MarkStream, t: f64, eta0: &'a Configuration) -> Result<Self> {
        if t > stream.horizon {
            return Err(Error::HorizonExceeded {
                requested: t,
                horizon: stream.horizon,
            });
        }
        let n = stream.n;
        let marks = &stream.marks[..stream.count_until(t)];
        let mut touching = vec![Vec::new(); n + 1];
        for (i, m) in marks.iter().enumerate() {
            match m.kind {
                MarkKind::Exchange(x) => {
                    touching[x].push(i);
                    touching[x + 1].push(i);
                }
                MarkKind::Plus(s) | MarkKind::Minus(s) => touching[outer_inner(n, s).0].push(i),
                MarkKind::Copy(s) | MarkKind::Branch(s) => touching[outer_inner(n, s).1].push(i),
            }
        }
        Ok(Resolver {
            marks,
            eta0,
            touching,
            memo: HashMap::new(),
        })
    }

    /// Last mark before index `m` that touches `site`.
    fn previous(&self, site: usize, m: usize) -> Option<usize> {
        let list = &self.touching[site];
        let k = list.partition_point(|&i| i < m);
        (k > 0).then(|| list[k - 1])
    }

    fn known(&self, site: usize, m: usize) -> Option<bool> {
        match self.previous(site, m) {
            None => Some(self.eta0.get(site)),
            Some(i) => self.memo.get(&(site, i + 1)).copied(),
        }
    }

    /// `η_t(x)`.
    pub fn value(&mut self, x: usize) -> bool {
        let n = self.eta0.n();
        let top = self.marks.len();
        let mut stack = vec![(x, top)];
        while let Some(&(site, m)) = stack.last() {
            let Some(i) = self.previous(site, m) else {
                stack.pop();
                continue;
            };
            if self.memo.contains_key(&(site, i + 1)) {
                stack.pop();
                continue;
            }
            let (deps, eval): ([Option<usize>; 2], fn(&[bool; 2]) -> bool) = match self.marks[i].kind {
                MarkKind::Exchange(b) => (
                    [Some(if site == b { b + 1 } else { b }), None],
                    |v| v[0],
                ),
                MarkKind::Plus(_) => ([None, None], |_| true),
                MarkKind::Minus(_) => ([None, None], |_| false),
                MarkKind::Copy(s) => ([Some(outer_inner(n, s).0), None], |v| v[0]),
                MarkKind::Branch(s) => ([Some(outer_inner(n, s).0), Some(site)], |v| v[0] || v[1]),
            };
            let mut vals = [false; 2];
            let mut missing = false;
            for (k, d) in deps.iter().enumerate() {
                if let Some(d) = *d {
                    match self.known(d, i) {
                        Some(v) => vals[k] = v,
                        None => {
                            missing = true;
                            stack.push((d, i));
                        }
                    }
                }
            }
            if !missing {
                self.memo.insert((site, i + 1), eval(&vals));
                stack.pop();
            }
        }
        self.known(x, top).unwrap()
    }
}

/// `η_t(x)` by backward resolution; agrees with forward replay of the same
/// stream for every realization.
pub fn resolve_site(x: usize, t: f64, eta0: &Configuration, stream: &MarkStream) -> Result<bool> {
    if !(1..eta0.n()).contains(&x) {
        return Err(Error::Index { index: x, n: eta0.n() });
    }
    Ok(Resolver::new(stream, t, eta0)?.value(x))
}
