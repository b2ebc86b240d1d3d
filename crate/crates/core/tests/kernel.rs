//! Mehler contour quadrature against an explicit product sum over the
//! eigenspace, and the kernel size ratio away from the diagonal.

use hermite_lp::hermite::hermite_normalized;
use hermite_lp::mehler::{kernel_bound_check, kernel_quadrature, BoundSampleSpec, KernelQuery};

/// Σ_{|α|=N} Π_k h_{α_k}(λx_k) h_{α_k}(λy_k) written out per dimension.
fn spectral_sum(n: usize, r: u64, x: &[f64], y: &[f64]) -> f64 {
    let lambda = (r as f64).sqrt();
    let big_n = ((r - n as u64) / 2) as usize;
    let f = |k: usize, d: usize| hermite_normalized(k, lambda * x[d]) * hermite_normalized(k, lambda * y[d]);
    match n {
        1 => f(big_n, 0),
        2 => (0..=big_n).map(|a| f(a, 0) * f(big_n - a, 1)).sum(),
        3 => (0..=big_n).flat_map(|a| (0..=big_n - a).map(move |b| (a, b))).map(|(a, b)| f(a, 0) * f(b, 1) * f(big_n - a - b, 2)).sum(),
        _ => unreachable!(),
    }
}

#[test]
fn quadrature_matches_product_sum() {
    let cases: [(usize, u64, Vec<f64>, Vec<f64>); 6] = [
        (1, 21, vec![0.3], vec![-0.2]),
        (1, 81, vec![0.5], vec![0.1]),
        (1, 201, vec![-0.7], vec![0.6]),
        (2, 42, vec![0.3, 0.1], vec![-0.2, 0.3]),
        (2, 102, vec![0.5, -0.2], vec![0.1, 0.4]),
        (3, 23, vec![0.5, 0.1, 0.2], vec![0.3, -0.2, 0.1]),
    ];
    for (n, r, x, y) in cases {
        let q = KernelQuery::new(n, r, x.clone(), y.clone()).unwrap();
        let v = kernel_quadrature(&q, 1e-10).unwrap();
        let d = spectral_sum(n, r, &x, &y);
        let scale = d.abs().max(1e-2 * (r as f64).powf((n as f64 - 2.0) / 2.0));
        assert!((v.re - d).abs() / scale < 1e-6, "n={n} R={r}: {} vs {d}", v.re);
        assert!(v.im.abs() / scale < 1e-6, "n={n} R={r}: imaginary part {}", v.im);
    }
}

#[test]
fn parity_of_level_is_enforced() {
    assert!(KernelQuery::new(2, 41, vec![0.1, 0.0], vec![0.0, 0.2]).is_err());
}

#[test]
fn size_ratio_stays_bounded() {
    for r in [102, 202] {
        let rep = kernel_bound_check(2, r, &BoundSampleSpec { mu: 0.3, count: 20, seed: 1, spread: 0.5 }).unwrap();
        assert!(rep.max_ratio < 50.0, "R={r}: {}", rep.max_ratio);
        assert!(rep.median_ratio <= rep.max_ratio);
        assert_eq!(rep.samples.len(), 20);
    }
}
