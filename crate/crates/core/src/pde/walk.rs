use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::InitialProfile;
use crate::model::ModelParams;
use crate::stats::Moments;

/// Random-walk representation of the discrete density at `(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwEstimate {
    /// Walk absorbed at site 3 before time `t`.
    pub p_left: f64,
    /// Absorbed at `N − 3` before `t`.
    pub p_right: f64,
    /// Still inside at time `t`.
    pub p_interior: f64,
    /// `E[f0(X_t / N); not absorbed]`.
    pub interior_term: f64,
    /// `p_left·α + p_right·α' + interior_term`.
    pub reconstruction: f64,
    pub stderr: f64,
    /// `E[min(H, t)]`.
    pub mean_exit_time: f64,
    pub n_samples: u64,
}

/// Simulate rate-`N²`-per-direction walks from `x`, absorbed at
/// `{3, N−3}`, up to time `t`.
pub fn rw_hitting_estimate(x: usize, t: f64, params: &ModelParams, f0: &InitialProfile, n_samples: u64, seed: u64) -> Result<RwEstimate> {
    let n = params.n;
    if n < 8 || !(3..=n - 3).contains(&x) {
        return Err(Error::Index { index: x, n });
    }
    if n_samples < 2 {
        return Err(Error::Domain("n_samples must be >= 2".into()));
    }
    let bd = params.boundary_densities();
    let total_rate = 2.0 * (n * n) as f64;
    const CHUNK: u64 = 256;
    let parts: Vec<(u64, u64, Moments, Moments, Moments)> = (0..n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ c);
            let (mut left, mut right) = (0u64, 0u64);
            let (mut val, mut interior, mut exit) = (Moments::default(), Moments::default(), Moments::default());
            for _ in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let mut pos = x;
                let mut s = 0.0;
                let mut absorbed = false;
                loop {
                    if pos == 3 || pos == n - 3 {
                        absorbed = true;
                        break;
                    }
                    let dt: f64 = rng.sample::<f64, _>(Exp1) / total_rate;
                    if s + dt >= t {
                        s = t;
                        break;
                    }
                    s += dt;
                    if rng.random::<bool>() {
                        pos += 1;
                    } else {
                        pos -= 1;
                    }
                }
                let (v, inner) = if absorbed && pos == 3 {
                    left += 1;
                    (bd.alpha, 0.0)
                } else if absorbed {
                    right += 1;
                    (bd.alpha_prime, 0.0)
                } else {
                    let f = f0.eval(pos as f64 / n as f64);
                    (f, f)
                };
                val.push(v);
                interior.push(inner);
                exit.push(s);
            }
            (left, right, val, interior, exit)
        })
        .collect();
    let (mut left, mut right) = (0, 0);
    let (mut val, mut interior, mut exit) = (Moments::default(), Moments::default(), Moments::default());
    for (l, r, v, i, e) in parts {
        left += l;
        right += r;
        val = val.merge(v);
        interior = interior.merge(i);
        exit = exit.merge(e);
    }
    let nf = n_samples as f64;
    Ok(RwEstimate {
        p_left: left as f64 / nf,
        p_right: right as f64 / nf,
        p_interior: (n_samples - left - right) as f64 / nf,
        interior_term: interior.mean(),
        reconstruction: val.mean(),
        stderr: val.stderr(),
        mean_exit_time: exit.mean(),
        n_samples,
    })
}
