use ssep_core::marks::{MarkKind, MarkStream};
use ssep_core::{ModelParams, Reservoir, Side};

fn params() -> ModelParams {
    ModelParams::new(10, 0.4, Reservoir::new(1.2, 0.3, 0.5, 0.4), Reservoir::new(0.8, 0.7, 0.2, 0.1)).unwrap()
}

/// Intensities straight from the rate constants.
fn oracle_intensity(p: &ModelParams, k: MarkKind) -> f64 {
    let n = p.n as f64;
    let s = n.powf(2.0 - p.theta);
    let res = |side: Side| match side {
        Side::Left => (p.r, p.rho_bar, p.b, p.c),
        Side::Right => (p.r_prime, p.rho_bar_prime, p.b_prime, p.c_prime),
    };
    match k {
        MarkKind::Exchange(_) => n * n,
        MarkKind::Plus(d) => s * res(d).0 * res(d).1,
        MarkKind::Minus(d) => s * res(d).0 * (1.0 - res(d).1),
        MarkKind::Copy(d) => s * res(d).3,
        MarkKind::Branch(d) => s * res(d).2,
    }
}

#[test]
fn component_counts_match_intensities() {
    let p = params();
    let horizon = 20.0;
    let stream = MarkStream::generate(&p, horizon, 3);
    let mut counts = vec![0u64; p.n + 6];
    for m in &stream {
        counts[m.kind.component(p.n)] += 1;
    }
    for (c, &k) in counts.iter().enumerate() {
        let kind = MarkKind::from_component(p.n, c);
        let mean = oracle_intensity(&p, kind) * horizon;
        assert!((k as f64 - mean).abs() < 4.5 * mean.sqrt(), "{kind:?}: {k} vs {mean}");
    }
}

#[test]
fn interarrival_times_are_exponential() {
    let p = params();
    let stream = MarkStream::generate(&p, 50.0, 11);
    for kind in [MarkKind::Exchange(4), MarkKind::Plus(Side::Left), MarkKind::Branch(Side::Right)] {
        let rate = oracle_intensity(&p, kind);
        let times: Vec<f64> = stream.iter().filter(|m| m.kind == kind).map(|m| m.time).collect();
        let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(f64::total_cmp);
        let m = gaps.len() as f64;
        // Kolmogorov–Smirnov distance to Exp(rate)
        let d = gaps
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let f = 1.0 - (-rate * g).exp();
                (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.63 / m.sqrt(), "{kind:?}: D = {d} over {m} gaps");
    }
}

#[test]
fn binary_dump_is_bit_exact() {
    let p = params();
    let stream = MarkStream::generate(&p, 0.3, 8);
    let mut buf = Vec::new();
    stream.write_binary(&mut buf).unwrap();
    let back = MarkStream::read_binary(&buf[..], p.n, 0.3).unwrap();
    assert_eq!(back.marks.len(), stream.marks.len());
    for (a, b) in back.marks.iter().zip(&stream.marks) {
        assert_eq!(a.time.to_bits(), b.time.to_bits());
        assert_eq!(a.kind, b.kind);
    }
}
