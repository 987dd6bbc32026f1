use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::InitialProfile;
use crate::model::ModelParams;

/// `N²[f(x+1) + f(x-1) - 2f(x)]` for `f` indexed by site.
pub fn laplacian_at(f: &[f64], x: usize, n: usize) -> Result<f64> {
    if x == 0 || x + 1 >= f.len() {
        return Err(Error::Index { index: x, n });
    }
    let n2 = (n * n) as f64;
    Ok(n2 * (f[x + 1] + f[x - 1] - 2.0 * f[x]))
}

/// Discrete Laplacian at every interior index `1..f.len()-1`; entry `i` of
/// the result is the value at index `i + 1`.
pub fn discrete_laplacian(f: &[f64], n: usize) -> Vec<f64> {
    let n2 = (n * n) as f64;
    f.windows(3).map(|w| n2 * (w[0] + w[2] - 2.0 * w[1])).collect()
}

/// Dirichlet data at sites `3` and `N - 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryMode {
    Fixed { alpha: f64, alpha_prime: f64 },
    /// Piecewise-linear traces through `(t, left, right)` rows sorted by
    /// time, held constant outside their range.
    Traces { rows: Vec<(f64, f64, f64)> },
}

impl BoundaryMode {
    pub fn from_params(params: &ModelParams) -> Self {
        let d = params.boundary_densities();
        BoundaryMode::Fixed {
            alpha: d.alpha,
            alpha_prime: d.alpha_prime,
        }
    }

    pub fn at(&self, t: f64) -> (f64, f64) {
        match self {
            BoundaryMode::Fixed { alpha, alpha_prime } => (*alpha, *alpha_prime),
            BoundaryMode::Traces { rows } => {
                let i = rows.partition_point(|r| r.0 < t);
                if i == 0 {
                    (rows[0].1, rows[0].2)
                } else if i == rows.len() {
                    let r = rows[rows.len() - 1];
                    (r.1, r.2)
                } else {
                    let (a, b) = (rows[i - 1], rows[i]);
                    let w = (t - a.0) / (b.0 - a.0);
                    (a.1 + w * (b.1 - a.1), a.2 + w * (b.2 - a.2))
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BoundaryMode::Fixed { .. } => Ok(()),
            BoundaryMode::Traces { rows } if !rows.is_empty() && rows.windows(2).all(|w| w[0].0 < w[1].0) => Ok(()),
            _ => Err(Error::Domain("boundary traces must be non-empty and time-ascending".into())),
        }
    }
}

/// Default step `1/(8N²)`.
pub fn default_dt(n: usize) -> f64 {
    1.0 / (8.0 * (n * n) as f64)
}

/// Explicit Euler integration of `∂_t ρ = Δ_N ρ` on `{4, …, N-4}`.
#[derive(Debug, Clone)]
pub struct DensitySolver {
    n: usize,
    dt: f64,
    t: f64,
    /// Indexed by site; entries outside `3..=N-3` are unused.
    rho: Vec<f64>,
    next: Vec<f64>,
    boundary: BoundaryMode,
}

impl DensitySolver {
    pub fn new(n: usize, f0: &InitialProfile, boundary: BoundaryMode, dt: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::Domain(format!("N = {n} leaves no interior between sites 3 and N-3")));
        }
        f0.validate()?;
        boundary.validate()?;
        let bound = 1.0 / (4.0 * (n * n) as f64);
        if !(dt > 0.0 && dt <= bound * (1.0 + 1e-12)) {
            return Err(Error::Stability { dt, bound });
        }
        let mut rho: Vec<f64> = (0..=n).map(|x| f0.eval(x as f64 / n as f64)).collect();
        let (a, b) = boundary.at(0.0);
        rho[3] = a;
        rho[n - 3] = b;
        Ok(DensitySolver {
            n,
            dt,
            t: 0.0,
            next: rho.clone(),
            rho,
            boundary,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Site-indexed state; valid on `3..=N-3`.
    pub fn state(&self) -> &[f64] {
        &self.rho
    }

    pub fn at(&self, x: usize) -> f64 {
        self.rho[x]
    }

    /// Values on sites `3..=N-3`.
    pub fn profile(&self) -> Vec<f64> {
        self.rho[3..=self.n - 3].to_vec()
    }

    /// One step of length `h <= dt`.
    pub fn step(&mut self, h: f64) {
        let n = self.n;
        let k = h * (n * n) as f64;
        for x in 4..=n - 4 {
            self.next[x] = self.rho[x] + k * (self.rho[x + 1] + self.rho[x - 1] - 2.0 * self.rho[x]);
        }
        self.t += h;
        let (a, b) = self.boundary.at(self.t);
        self.next[3] = a;
        self.next[n - 3] = b;
        std::mem::swap(&mut self.rho, &mut self.next);
    }

    pub fn advance_to(&mut self, t: f64) {
        while self.t < t {
            let h = (t - self.t).min(self.dt);
            // avoid a dangling sliver step from rounding
            if h < 1e-15 * self.dt.max(t) {
                self.t = t;
                break;
            }
            self.step(h);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDensitySolution {
    pub n: usize,
    pub dt: f64,
    pub boundary: BoundaryMode,
    pub times: Vec<f64>,
    /// `profiles[k][x - 3]` is `ρ^N_{times[k]}(x)` for `x` in `3..=N-3`.
    pub profiles: Vec<Vec<f64>>,
}

impl DiscreteDensitySolution {
    pub fn at(&self, k: usize, x: usize) -> f64 {
        self.profiles[k][x - 3]
    }

    pub fn sites(&self) -> std::ops::RangeInclusive<usize> {
        3..=self.n - 3
    }
}

/// Solve the discrete density equation and record the profile at each of
/// `times` (ascending). `dt = None` uses `1/(8N²)`.
pub fn solve_discrete_density(
    params: &ModelParams,
    f0: &InitialProfile,
    boundary: BoundaryMode,
    times: &[f64],
    dt: Option<f64>,
) -> Result<DiscreteDensitySolution> {
    let n = params.n;
    let dt = dt.unwrap_or_else(|| default_dt(n));
    if times.windows(2).any(|w| w[0] > w[1]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::Domain("times must be non-negative and ascending".into()));
    }
    let mut solver = DensitySolver::new(n, f0, boundary.clone(), dt)?;
    let mut profiles = Vec::with_capacity(times.len());
    for &t in times {
        solver.advance_to(t);
        profiles.push(solver.profile());
    }
    Ok(DiscreteDensitySolution {
        n,
        dt,
        boundary,
        times: times.to_vec(),
        profiles,
    })
}
