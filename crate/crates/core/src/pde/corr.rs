use serde::{Deserialize, Serialize};

use super::DensitySolver;
use crate::error::{Error, Result};

/// Values held fixed on the boundary of the correlation domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrBoundary {
    /// Zero everywhere off the domain.
    #[default]
    Zero,
    /// Given values at listed pairs, zero elsewhere.
    Values { points: Vec<((usize, usize), f64)> },
}

/// Geometry of the correlation domain for a given `N` and `δ`.
///
/// With `d = round(δN)` and `e = N − d`, the unknowns are the off-diagonal
/// bulk pairs `4 ≤ x ≤ e−1`, `d+1 ≤ y ≤ N−4`, `x < y−1`, and the diagonal
/// pairs `(x, x+1)` for `d ≤ x ≤ e`. Every other pair is boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrDomain {
    pub n: usize,
    pub delta: f64,
    pub d: usize,
    pub e: usize,
}

impl CorrDomain {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::Domain(format!("delta = {delta} not in (0, 1/2)")));
        }
        let d = (delta * n as f64).round() as usize;
        let e = n.saturating_sub(d);
        if d < 4 || e + 4 > n + 1 || d + 1 >= e {
            return Err(Error::Domain(format!("degenerate correlation grid for N = {n}, delta = {delta}")));
        }
        Ok(CorrDomain { n, delta, d, e })
    }

    pub fn is_diagonal(&self, x: usize, y: usize) -> bool {
        y == x + 1 && self.d <= x && x <= self.e
    }

    pub fn is_bulk(&self, x: usize, y: usize) -> bool {
        4 <= x && x < self.e && self.d < y && y + 4 <= self.n && x + 1 < y
    }

    pub fn is_unknown(&self, x: usize, y: usize) -> bool {
        self.is_bulk(x, y) || self.is_diagonal(x, y)
    }

    /// Unknown pairs in row-major order.
    pub fn points(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for x in 1..self.n {
            for y in x + 1..self.n {
                if self.is_unknown(x, y) {
                    v.push((x, y));
                }
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSolution {
    pub domain: CorrDomain,
    pub dt: f64,
    pub points: Vec<(usize, usize)>,
    pub times: Vec<f64>,
    /// `values[k][i]` is `φ` at `times[k]`, pair `points[i]`.
    pub values: Vec<Vec<f64>>,
}

impl CorrelationSolution {
    pub fn sup_abs(&self, k: usize) -> f64 {
        self.values[k].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn get(&self, k: usize, x: usize, y: usize) -> Option<f64> {
        self.points.iter().position(|&p| p == (x, y)).map(|i| self.values[k][i])
    }
}

/// Integrate the two-point correlation equation with zero initial data,
/// stepping `density` (which must start at time 0) in lockstep to supply
/// the diagonal source `−N²(ρ(x+1) − ρ(x))²`.
pub fn solve_correlation_field(
    mut density: DensitySolver,
    delta: f64,
    times: &[f64],
    boundary: &CorrBoundary,
) -> Result<CorrelationSolution> {
    let n = density.n();
    let dt = density.dt();
    let bound = 1.0 / (8.0 * (n * n) as f64);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::Stability { dt, bound });
    }
    if density.time() != 0.0 {
        return Err(Error::Domain("density solver must start at t = 0".into()));
    }
    if times.windows(2).any(|w| w[0] > w[1]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::Domain("times must be non-negative and ascending".into()));
    }
    let dom = CorrDomain::new(n, delta)?;
    let w = n + 1;
    let idx = |x: usize, y: usize| x * w + y;
    let mut phi = vec![0.0; w * w];
    if let CorrBoundary::Values { points } = boundary {
        for &((x, y), v) in points {
            if x < y && y < n && !dom.is_unknown(x, y) {
                phi[idx(x, y)] = v;
            }
        }
    }
    let points = dom.points();
    // (cell, neighbors, diagonal site)
    let stencil: Vec<(usize, [usize; 4], Option<usize>)> = points
        .iter()
        .map(|&(x, y)| {
            if dom.is_diagonal(x, y) {
                (idx(x, y), [idx(x - 1, y), idx(x, y + 1), usize::MAX, usize::MAX], Some(x))
            } else {
                (idx(x, y), [idx(x + 1, y), idx(x - 1, y), idx(x, y + 1), idx(x, y - 1)], None)
            }
        })
        .collect();
    let mut next = phi.clone();
    let n2 = (n * n) as f64;
    let mut t = 0.0;
    let mut values = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let h = (target - t).min(dt);
            if h < 1e-15 * dt.max(target) {
                t = target;
                break;
            }
            let rho = density.state();
            for &(c, nb, diag) in &stencil {
                let v = phi[c];
                next[c] = match diag {
                    Some(x) => {
                        let grad = rho[x + 1] - rho[x];
                        v + h * (n2 * (phi[nb[0]] + phi[nb[1]] - 2.0 * v) - n2 * grad * grad)
                    }
                    None => v + h * n2 * (phi[nb[0]] + phi[nb[1]] + phi[nb[2]] + phi[nb[3]] - 4.0 * v),
                };
            }
            for &(c, _, _) in &stencil {
                phi[c] = next[c];
            }
            density.step(h);
            t += h;
        }
        values.push(stencil.iter().map(|s| phi[s.0]).collect());
    }
    Ok(CorrelationSolution {
        domain: dom,
        dt,
        points,
        times: times.to_vec(),
        values,
    })
}
