//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the simulator: states are plain bit masks, bit `x - 1` = site `x`.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ssep_core::ModelParams;

/// Dense generator `Q[i][j]` (row = from, column = to) built directly from
/// the rate formulas.
pub fn generator(p: &ModelParams) -> DMatrix<f64> {
    let n = p.n;
    let m = n - 1;
    let size = 1usize << m;
    let bulk = (n * n) as f64;
    let scale = (n as f64).powf(2.0 - p.theta);
    let bit = |s: usize, x: usize| (s >> (x - 1)) & 1 == 1;
    let mut q = DMatrix::zeros(size, size);
    for s in 0..size {
        let mut add = |to: usize, rate: f64| {
            if rate > 0.0 && to != s {
                q[(s, to)] += rate;
                q[(s, s)] -= rate;
            }
        };
        for x in 1..n - 1 {
            if bit(s, x) != bit(s, x + 1) {
                add(s ^ (1 << (x - 1)) ^ (1 << x), bulk);
            }
        }
        // (r, rho_bar, b, c, outer site, inner site)
        let sides = [(p.r, p.rho_bar, p.b, p.c, 1, 2), (p.r_prime, p.rho_bar_prime, p.b_prime, p.c_prime, n - 1, n - 2)];
        for (r, rb, b, c, o, i) in sides {
            let (eo, ei) = (bit(s, o) as u8 as f64, bit(s, i) as u8 as f64);
            let c1 = r * (rb * (1.0 - eo) + (1.0 - rb) * eo);
            let c2 = c * (eo * (1.0 - ei) + (1.0 - eo) * ei) + b * eo * (1.0 - ei);
            add(s ^ (1 << (o - 1)), scale * c1);
            add(s ^ (1 << (i - 1)), scale * c2);
        }
    }
    q
}

/// Product Bernoulli law with `f(x)` at site `x`.
pub fn product_law(n: usize, f: impl Fn(usize) -> f64) -> DVector<f64> {
    let m = n - 1;
    DVector::from_iterator(
        1 << m,
        (0..1usize << m).map(|s| (1..n).map(|x| if (s >> (x - 1)) & 1 == 1 { f(x) } else { 1.0 - f(x) }).product::<f64>()),
    )
}

/// `p0ᵀ e^{tQ}` by uniformization, summed until past the Poisson mode
/// with terms below `1e-18`.
pub fn transient_law(q: &DMatrix<f64>, p0: &DVector<f64>, t: f64) -> DVector<f64> {
    let lambda = (0..q.nrows()).map(|i| -q[(i, i)]).fold(0.0, f64::max) * 1.01;
    let size = q.nrows();
    let pt = (DMatrix::identity(size, size) + q / lambda).transpose();
    let mu = lambda * t;
    let mut v = p0.clone();
    // Poisson weights in log space: e^{-mu} underflows for long times
    let mut log_w = -mu;
    let mut out = &v * log_w.exp();
    let mut k = 0u64;
    loop {
        k += 1;
        v = &pt * v;
        log_w += mu.ln() - (k as f64).ln();
        let w = log_w.exp();
        out += &v * w;
        if k as f64 > mu && w < 1e-18 {
            return out;
        }
    }
}

/// Normalized left null vector of `Q`.
pub fn stationary_law(q: &DMatrix<f64>) -> DVector<f64> {
    let svd = q.transpose().svd(true, true);
    let (k, _) = svd.singular_values.argmin();
    let v_t = svd.v_t.expect("right singular vectors");
    let v: DVector<f64> = v_t.row(k).transpose();
    let s = v.sum();
    v / s
}

/// Mean of site `x` and covariance of `(x, y)` under a law on bit masks.
pub fn site_mean(law: &DVector<f64>, x: usize) -> f64 {
    law.iter().enumerate().filter(|(s, _)| (s >> (x - 1)) & 1 == 1).map(|(_, p)| p).sum()
}

pub fn pair_cov(law: &DVector<f64>, x: usize, y: usize) -> f64 {
    let both: f64 = law
        .iter()
        .enumerate()
        .filter(|(s, _)| (s >> (x - 1)) & 1 == 1 && (s >> (y - 1)) & 1 == 1)
        .map(|(_, p)| p)
        .sum();
    both - site_mean(law, x) * site_mean(law, y)
}

/// Solve a tridiagonal system (`a` sub, `b` main, `c` super diagonal).
pub fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = if i + 1 < n { c[i] / m } else { 0.0 };
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Crank–Nicolson for `u_t = u_xx` on `[0, 1]`, Dirichlet `left`/`right`,
/// `m` intervals, step `dt`; returns nodal values `u(i/m)`.
pub fn crank_nicolson(f0: impl Fn(f64) -> f64, left: f64, right: f64, t: f64, m: usize, dt: f64) -> Vec<f64> {
    let h = 1.0 / m as f64;
    let steps = (t / dt).round() as usize;
    let k = dt / (h * h);
    let mut u: Vec<f64> = (0..=m).map(|i| f0(i as f64 * h)).collect();
    u[0] = left;
    u[m] = right;
    let inner = m - 1;
    let a = vec![-k / 2.0; inner];
    let b = vec![1.0 + k; inner];
    let c = vec![-k / 2.0; inner];
    for _ in 0..steps {
        let mut d: Vec<f64> = (1..m).map(|i| u[i] + k / 2.0 * (u[i - 1] - 2.0 * u[i] + u[i + 1])).collect();
        d[0] += k / 2.0 * left;
        d[inner - 1] += k / 2.0 * right;
        let sol = thomas(&a, &b, &c, &d);
        u[1..m].copy_from_slice(&sol);
    }
    u
}
