//! Model parameters, configurations, jump rates and single transitions.
//!
//! The lattice is `Λ_N = {1, …, N-1}`. Bulk bonds `(x, x+1)` for
//! `1 ≤ x ≤ N-2` stir at rate `N²`; the reservoirs act on sites `1, 2` and
//! `N-1, N-2` at rate `N^{2-θ}` times the rates returned by
//! [`boundary_rates`].

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which end of the lattice a reservoir sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];
}

/// Rate constants of one reservoir.
///
/// At rate `r` the outer site is resampled from Bernoulli(`rho_bar`); at rate
/// `c` the inner site copies the outer one; at rate `b` the inner site is
/// filled when the outer one is occupied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub r: f64,
    pub rho_bar: f64,
    pub b: f64,
    pub c: f64,
}

impl Reservoir {
    pub fn new(r: f64, rho_bar: f64, b: f64, c: f64) -> Self {
        Reservoir { r, rho_bar, b, c }
    }

    fn validate(&self, tag: &str) -> Result<()> {
        let finite = [self.r, self.rho_bar, self.b, self.c]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain(format!("{tag}: rates must be finite")));
        }
        if self.r <= 0.0 {
            return Err(Error::Domain(format!("{tag}: r must be > 0, got {}", self.r)));
        }
        if !(0.0..=1.0).contains(&self.rho_bar) {
            return Err(Error::Domain(format!(
                "{tag}: rho_bar must lie in [0,1], got {}",
                self.rho_bar
            )));
        }
        if self.b < 0.0 || self.c < 0.0 {
            return Err(Error::Domain(format!("{tag}: b and c must be >= 0")));
        }
        Ok(())
    }

    /// Boundary density solving `r(ρ̄-α) + bα(1-α) = 0`.
    pub fn alpha(&self) -> f64 {
        // validated reservoirs never hit the error branch
        alpha_from_params(self.r, self.b, self.rho_bar).unwrap_or(self.rho_bar)
    }
}

/// All parameters of the boundary-driven exclusion process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsFile")]
pub struct ModelParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub theta: f64,
    pub r: f64,
    pub rho_bar: f64,
    pub b: f64,
    pub c: f64,
    pub r_prime: f64,
    pub rho_bar_prime: f64,
    pub b_prime: f64,
    pub c_prime: f64,
}

impl ModelParams {
    pub fn new(n: usize, theta: f64, left: Reservoir, right: Reservoir) -> Result<Self> {
        let params = ModelParams {
            n,
            theta,
            r: left.r,
            rho_bar: left.rho_bar,
            b: left.b,
            c: left.c,
            r_prime: right.r,
            rho_bar_prime: right.rho_bar,
            b_prime: right.b,
            c_prime: right.c,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 5 {
            return Err(Error::Domain(format!("N must be >= 5, got {}", self.n)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Domain(format!(
                "theta must lie in (0,1), got {}",
                self.theta
            )));
        }
        self.reservoir(Side::Left).validate("left")?;
        self.reservoir(Side::Right).validate("right")?;
        Ok(())
    }

    pub fn reservoir(&self, side: Side) -> Reservoir {
        match side {
            Side::Left => Reservoir::new(self.r, self.rho_bar, self.b, self.c),
            Side::Right => Reservoir::new(self.r_prime, self.rho_bar_prime, self.b_prime, self.c_prime),
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// `b < r` and `b' < r'`: the dual branching process dies out.
    pub fn h1_holds(&self) -> bool {
        self.b < self.r && self.b_prime < self.r_prime
    }

    /// `(1 - θ) / 2`.
    pub fn theta_hat(&self) -> f64 {
        (1.0 - self.theta) / 2.0
    }

    /// Rate of each bulk bond clock, `N²`.
    pub fn bulk_rate(&self) -> f64 {
        let n = self.n as f64;
        n * n
    }

    /// Multiplier `N^{2-θ}` applied to every reservoir rate.
    pub fn boundary_scale(&self) -> f64 {
        (self.n as f64).powf(2.0 - self.theta)
    }

    pub fn boundary_densities(&self) -> BoundaryDensities {
        BoundaryDensities {
            alpha: self.reservoir(Side::Left).alpha(),
            alpha_prime: self.reservoir(Side::Right).alpha(),
        }
    }

    /// Number of lattice sites, `N - 1`.
    pub fn sites(&self) -> usize {
        self.n - 1
    }

    /// Outer (reservoir) site and inner (copy/branch) site of a side.
    pub fn boundary_sites(&self, side: Side) -> (usize, usize) {
        match side {
            Side::Left => (1, 2),
            Side::Right => (self.n - 1, self.n - 2),
        }
    }

    /// Human-readable warning when H1 is violated.
    pub fn h1_warning(&self) -> Option<String> {
        if self.h1_holds() {
            None
        } else {
            Some(format!(
                "warning: assumption H1 violated (b={} r={}, b'={} r'={}); the dual branching process may not die out",
                self.b, self.r, self.b_prime, self.r_prime
            ))
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Load and validate a parameter file, printing the H1 warning to stderr.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let params = Self::from_json_str(&text)?;
        if let Some(w) = params.h1_warning() {
            eprintln!("{w}");
        }
        Ok(params)
    }
}

/// On-disk parameter document. Accepts either the reservoir parametrization
/// `(r, rho_bar, b, c, …)` or the flip-rate one `(alpha_1, gamma_1, …)`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    #[serde(rename = "N")]
    n: usize,
    theta: f64,
    r: Option<f64>,
    rho_bar: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    r_prime: Option<f64>,
    rho_bar_prime: Option<f64>,
    b_prime: Option<f64>,
    c_prime: Option<f64>,
    alpha_1: Option<f64>,
    gamma_1: Option<f64>,
    alpha_2: Option<f64>,
    gamma_2: Option<f64>,
    beta_1: Option<f64>,
    delta_1: Option<f64>,
    beta_2: Option<f64>,
    delta_2: Option<f64>,
}

/// Convert flip rates `(fill outer, empty outer, fill inner, empty inner)`
/// into a reservoir.
fn reservoir_from_flip_rates(fill1: f64, empty1: f64, fill2: f64, empty2: f64, tag: &str) -> Result<Reservoir> {
    let r = fill1 + empty1;
    if r <= 0.0 {
        return Err(Error::Domain(format!("{tag}: outer flip rates must have positive sum")));
    }
    if fill2 < empty2 {
        return Err(Error::Domain(format!(
            "{tag}: inner fill rate {fill2} below inner empty rate {empty2}; b would be negative"
        )));
    }
    Ok(Reservoir::new(r, fill1 / r, fill2 - empty2, empty2))
}

impl TryFrom<ParamsFile> for ModelParams {
    type Error = Error;

    fn try_from(f: ParamsFile) -> Result<Self> {
        let reservoir_form = [f.r, f.rho_bar, f.b, f.c, f.r_prime, f.rho_bar_prime, f.b_prime, f.c_prime];
        let flip_form = [
            f.alpha_1, f.gamma_1, f.alpha_2, f.gamma_2, f.beta_1, f.delta_1, f.beta_2, f.delta_2,
        ];
        let any_res = reservoir_form.iter().any(Option::is_some);
        let any_flip = flip_form.iter().any(Option::is_some);
        let (left, right) = match (any_res, any_flip) {
            (true, true) => {
                return Err(Error::Domain(
                    "parameter file mixes (r, rho_bar, b, c) and (alpha_i, gamma_i, …) forms".into(),
                ))
            }
            (true, false) => {
                let [r, rb, b, c, rp, rbp, bp, cp] = unwrap_all(reservoir_form, "r, rho_bar, b, c and primed")?;
                (Reservoir::new(r, rb, b, c), Reservoir::new(rp, rbp, bp, cp))
            }
            (false, true) => {
                let [a1, g1, a2, g2, b1, d1, b2, d2] =
                    unwrap_all(flip_form, "alpha_1, gamma_1, alpha_2, gamma_2, beta_1, delta_1, beta_2, delta_2")?;
                (
                    reservoir_from_flip_rates(a1, g1, a2, g2, "left")?,
                    reservoir_from_flip_rates(b1, d1, b2, d2, "right")?,
                )
            }
            (false, false) => return Err(Error::Domain("parameter file has no rate constants".into())),
        };
        ModelParams::new(f.n, f.theta, left, right)
    }
}

fn unwrap_all(vals: [Option<f64>; 8], names: &str) -> Result<[f64; 8]> {
    let mut out = [0.0; 8];
    for (o, v) in out.iter_mut().zip(vals) {
        *o = v.ok_or_else(|| Error::Domain(format!("parameter file must give all of {names}")))?;
    }
    Ok(out)
}

/// The macroscopic Dirichlet values at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDensities {
    pub alpha: f64,
    pub alpha_prime: f64,
}

/// Unique root in `[0,1]` of `r(ρ̄ - α) + bα(1 - α) = 0`.
///
/// Uses `(√((r-b)² + 4brρ̄) + b - r) / (2b)`; for `b = 0` the equation is
/// linear and the root is `ρ̄`.
pub fn alpha_from_params(r: f64, b: f64, rho_bar: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("r must be > 0, got {r}")));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!("b must be >= 0, got {b}")));
    }
    if !(0.0..=1.0).contains(&rho_bar) {
        return Err(Error::Domain(format!("rho_bar must lie in [0,1], got {rho_bar}")));
    }
    if b == 0.0 {
        return Ok(rho_bar);
    }
    let disc = ((r - b) * (r - b) + 4.0 * b * r * rho_bar).sqrt();
    // When r > b the numerator cancels; use the conjugate form there.
    let alpha = if r > b {
        2.0 * r * rho_bar / (disc + r - b)
    } else {
        (disc + b - r) / (2.0 * b)
    };
    Ok(alpha.clamp(0.0, 1.0))
}

/// Occupancy vector `η ∈ {0,1}^{Λ_N}`, indexed by site `x ∈ {1, …, N-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    occ: Vec<u8>,
}

impl Configuration {
    pub fn empty(n: usize) -> Self {
        Configuration { occ: vec![0; n - 1] }
    }

    pub fn full(n: usize) -> Self {
        Configuration { occ: vec![1; n - 1] }
    }

    /// Build from site values `η(1), …, η(N-1)`.
    pub fn from_bits(bits: &[bool]) -> Self {
        Configuration {
            occ: bits.iter().map(|&b| b as u8).collect(),
        }
    }

    /// Decode from an integer whose bit `x-1` is `η(x)`.
    pub fn from_index(n: usize, index: usize) -> Self {
        Configuration {
            occ: (0..n - 1).map(|i| ((index >> i) & 1) as u8).collect(),
        }
    }

    pub fn to_index(&self) -> usize {
        self.occ
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| acc | ((v as usize) << i))
    }

    /// Lattice scale `N` (one more than the number of sites).
    pub fn n(&self) -> usize {
        self.occ.len() + 1
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        self.occ[x - 1] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, value: bool) {
        self.occ[x - 1] = value as u8;
    }

    #[inline]
    pub(crate) fn raw(&self) -> &[u8] {
        &self.occ
    }

    #[inline]
    pub(crate) fn raw_mut(&mut self) -> &mut [u8] {
        &mut self.occ
    }

    pub fn particle_count(&self) -> usize {
        self.occ.iter().map(|&v| v as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.occ.iter().map(|&v| v != 0)
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.occ.iter().map(|&v| if v != 0 { '1' } else { '0' }).collect();
        write!(f, "Configuration({s})")
    }
}

/// Reservoir flip rates of a configuration, before the `N^{2-θ}` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRates {
    /// Flip of site 1.
    pub c_l1: f64,
    /// Flip of site 2.
    pub c_l2: f64,
    /// Flip of site N-1.
    pub c_r1: f64,
    /// Flip of site N-2.
    pub c_r2: f64,
}

impl BoundaryRates {
    pub fn sum(&self) -> f64 {
        self.c_l1 + self.c_l2 + self.c_r1 + self.c_r2
    }
}

/// Outer and inner flip rates of one side.
#[inline]
pub(crate) fn side_flip_rates(res: &Reservoir, outer: bool, inner: bool) -> (f64, f64) {
    let outer_rate = if outer { res.r * (1.0 - res.rho_bar) } else { res.r * res.rho_bar };
    let mut inner_rate = if outer != inner { res.c } else { 0.0 };
    if outer && !inner {
        inner_rate += res.b;
    }
    (outer_rate, inner_rate)
}

pub fn boundary_rates(eta: &Configuration, params: &ModelParams) -> BoundaryRates {
    let n = params.n;
    let (c_l1, c_l2) = side_flip_rates(&params.reservoir(Side::Left), eta.get(1), eta.get(2));
    let (c_r1, c_r2) = side_flip_rates(&params.reservoir(Side::Right), eta.get(n - 1), eta.get(n - 2));
    BoundaryRates { c_l1, c_l2, c_r1, c_r2 }
}

/// A single move of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// Swap the contents of `x` and `x + 1`.
    Exchange(usize),
    /// Complement site `x` (only boundary sites carry flip rates).
    Flip(usize),
}

/// Return `η^{x,x+1}` or `η^x`; the input is left untouched.
pub fn apply_transition(eta: &Configuration, mv: Transition) -> Result<Configuration> {
    let n = eta.n();
    let mut out = eta.clone();
    match mv {
        Transition::Exchange(x) => {
            if x < 1 || x > n - 2 {
                return Err(Error::Index { index: x, n });
            }
            out.occ.swap(x - 1, x);
        }
        Transition::Flip(x) => {
            if ![1, 2, n - 2, n - 1].contains(&x) {
                return Err(Error::Index { index: x, n });
            }
            out.occ[x - 1] ^= 1;
        }
    }
    Ok(out)
}

/// Number of bonds whose endpoints differ.
pub fn active_bonds(eta: &Configuration) -> usize {
    eta.occ.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Total rate of transitions that change the configuration:
/// `N² · #active bonds + N^{2-θ} · Σ boundary rates`.
pub fn total_jump_rate(eta: &Configuration, params: &ModelParams) -> f64 {
    params.bulk_rate() * active_bonds(eta) as f64 + params.boundary_scale() * boundary_rates(eta, params).sum()
}
