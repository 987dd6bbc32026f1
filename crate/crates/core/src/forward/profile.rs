use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Configuration;

/// Macroscopic initial density `f0 : [0,1] → [0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialProfile {
    Constant { value: f64 },
    Linear { left: f64, right: f64 },
    /// `base + amplitude · sin(πu)`.
    SineBump { base: f64, amplitude: f64 },
    /// Piecewise-linear through `(u, value)` points sorted by `u`.
    Table { points: Vec<(f64, f64)> },
}

impl InitialProfile {
    pub fn constant(value: f64) -> Self {
        InitialProfile::Constant { value }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            InitialProfile::Constant { value } => *value,
            InitialProfile::Linear { left, right } => left + u * (right - left),
            InitialProfile::SineBump { base, amplitude } => base + amplitude * (PI * u).sin(),
            InitialProfile::Table { points } => {
                let i = points.partition_point(|p| p.0 < u);
                if i == 0 {
                    points[0].1
                } else if i == points.len() {
                    points[points.len() - 1].1
                } else {
                    let (u0, v0) = points[i - 1];
                    let (u1, v1) = points[i];
                    v0 + (u - u0) / (u1 - u0) * (v1 - v0)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        let ok = match self {
            InitialProfile::Constant { value } => in_unit(*value),
            InitialProfile::Linear { left, right } => in_unit(*left) && in_unit(*right),
            InitialProfile::SineBump { base, amplitude } => in_unit(*base) && in_unit(base + amplitude),
            InitialProfile::Table { points } => {
                !points.is_empty()
                    && points.windows(2).all(|w| w[0].0 < w[1].0)
                    && points.iter().all(|&(u, v)| in_unit(u) && in_unit(v))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("initial profile leaves [0,1]: {self:?}")))
        }
    }
}

/// Draw `η(x) ~ Bernoulli(f0(x/N))` independently.
pub fn sample_initial_with<R: Rng + ?Sized>(profile: &InitialProfile, n: usize, rng: &mut R) -> Configuration {
    let mut eta = Configuration::empty(n);
    for x in 1..n {
        let p = profile.eval(x as f64 / n as f64);
        eta.set(x, rng.random::<f64>() < p);
    }
    eta
}
