use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::InitialProfile;

/// `α + u(α' − α)`.
pub fn stationary_profile(alpha: f64, alpha_prime: f64, u_grid: &[f64]) -> Vec<f64> {
    u_grid.iter().map(|u| alpha + u * (alpha_prime - alpha)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatSolution {
    pub t: f64,
    pub values: Vec<f64>,
    /// Sine coefficients of `f0 − ρ*`, `coefficients[k-1]` for mode `k`.
    pub coefficients: Vec<f64>,
    /// Estimate of `Σ_{k > n_modes} |c_k| e^{−k²π²t}`.
    pub truncation_bound: f64,
}

/// Extra modes summed for the truncation estimate.
const TAIL_MODES: usize = 400;

/// Composite Simpson estimate of `2∫₀¹ g(u) sin(kπu) du` for `k = 1..=m`.
fn sine_coefficients(g: impl Fn(f64) -> f64, m: usize) -> Vec<f64> {
    // enough panels to resolve the highest mode many times over
    let panels = (64 * m).max(4096) & !1;
    let h = 1.0 / panels as f64;
    let gv: Vec<f64> = (0..=panels).map(|i| g(i as f64 * h)).collect();
    (1..=m)
        .map(|k| {
            let kp = k as f64 * PI;
            let mut s = 0.0;
            for (i, v) in gv.iter().enumerate() {
                let w = if i == 0 || i == panels {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s += w * v * (kp * i as f64 * h).sin();
            }
            2.0 * s * h / 3.0
        })
        .collect()
}

/// Series solution of the heat equation on `[0,1]` with Dirichlet values
/// `α`, `α'` and initial data `f0`.
pub fn heat_solution(f0: &InitialProfile, alpha: f64, alpha_prime: f64, t: f64, u_grid: &[f64], n_modes: usize) -> Result<HeatSolution> {
    if n_modes == 0 {
        return Err(Error::Domain("n_modes must be >= 1".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("negative time {t}")));
    }
    let g = |u: f64| f0.eval(u) - (alpha + u * (alpha_prime - alpha));
    let all = sine_coefficients(g, n_modes + TAIL_MODES);
    let decay = |k: usize| (-((k * k) as f64) * PI * PI * t).exp();
    let values = u_grid
        .iter()
        .map(|&u| {
            let mut v = alpha + u * (alpha_prime - alpha);
            for (i, c) in all[..n_modes].iter().enumerate() {
                let k = i + 1;
                v += c * decay(k) * (k as f64 * PI * u).sin();
            }
            v
        })
        .collect();
    let truncation_bound = all[n_modes..]
        .iter()
        .enumerate()
        .map(|(i, c)| c.abs() * decay(n_modes + 1 + i))
        .sum();
    Ok(HeatSolution {
        t,
        values,
        coefficients: all[..n_modes].to_vec(),
        truncation_bound,
    })
}
