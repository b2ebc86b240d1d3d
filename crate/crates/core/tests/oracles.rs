//! Library values against independent oracles: exact integer Hermite
//! recurrences, quadrature of the WKB action, the raw phase formula and
//! bisection for its critical points.

use std::f64::consts::{FRAC_PI_2, PI};

use hermite_lp::hermite::{action_s, hermite_normalized, Branch};
use hermite_lp::phase::{curvature_and_hessian, phase_geometry, psi, psi_prime, CriticalPoint};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// a / b as f64 for positive big integers, keeping 64 bits of quotient.
fn ratio_to_f64(a: &BigInt, b: &BigInt) -> f64 {
    let shift = a.bits() as i64 - b.bits() as i64 - 64;
    let (a, b) = if shift > 0 { (a.clone(), b << shift as usize) } else { (a << (-shift) as usize, b.clone()) };
    let q = a.div_floor(&b);
    q.to_f64().unwrap() * 2f64.powi(shift as i32)
}

/// h_k(p/q) from the integer recurrence G_{k+1} = 2p G_k - 2k q² G_{k-1},
/// G_k = q^k H_k(p/q), with h_k² = H_k² e^{-x²} / (2^k k! √π).
fn hermite_oracle(k: usize, p: i64, q: i64) -> f64 {
    let (pb, q2) = (BigInt::from(p), BigInt::from(q) * BigInt::from(q));
    let mut g_prev = BigInt::one();
    let mut g = BigInt::from(2) * &pb;
    if k == 0 {
        g = BigInt::one();
    } else {
        for j in 1..k {
            let next = BigInt::from(2) * &pb * &g - BigInt::from(2 * j) * &q2 * &g_prev;
            g_prev = std::mem::replace(&mut g, next);
        }
    }
    if g.is_zero() {
        return 0.0;
    }
    let mut den = BigInt::one() << k;
    for j in 2..=k {
        den *= j;
    }
    for _ in 0..k {
        den *= &q2;
    }
    let x = p as f64 / q as f64;
    let mag = ratio_to_f64(&(&g * &g), &den).sqrt() * (-x * x / 2.0).exp() * PI.powf(-0.25);
    if g.is_negative() {
        -mag
    } else {
        mag
    }
}

#[test]
fn hermite_matches_integer_recurrence() {
    let points = [(0, 1), (1, 3), (7, 4), (-5, 2), (10, 1), (37, 2), (-61, 4)];
    for k in [0, 1, 2, 5, 17, 50, 121, 200] {
        for &(p, q) in &points {
            let x = p as f64 / q as f64;
            let exact = hermite_oracle(k, p, q);
            let got = hermite_normalized(k, x);
            assert!((got - exact).abs() <= 1e-11 * exact.abs() + 1e-300, "k={k} x={x}: {got} vs {exact}");
        }
    }
}

/// Composite Simpson on a smooth integrand.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / (2 * m) as f64;
    let mut s = f(a) + f(b);
    for i in 1..2 * m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn action_matches_substituted_quadrature() {
    for u in [1.0f64, 3.7, 20.0, 141.0] {
        for w in [0.0f64, 0.1, 0.5, 0.99, 1.0, 1.001, 1.3, 3.0] {
            let x = w * u;
            // t = u sin θ inside, t = u cosh v outside
            let expected = if w <= 1.0 {
                simpson(|th| u * u * th.cos().powi(2), 0.0, w.asin(), 2000)
            } else {
                PI * u * u / 4.0 + simpson(|v| u * u * v.sinh().powi(2), 0.0, w.acosh(), 2000)
            };
            let got = action_s(u, x, Branch::Minus).unwrap();
            assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0), "u={u} x={x}: {got} vs {expected}");
            assert_eq!(action_s(u, -x, Branch::Minus).unwrap(), -got);
            if w >= 1.0 {
                let plus = simpson(|v| u * u * v.sinh().powi(2), 0.0, w.acosh(), 2000);
                let got = action_s(u, x, Branch::Plus).unwrap();
                assert!((got - plus).abs() <= 1e-12 * plus.abs().max(1.0), "plus u={u} x={x}");
            }
        }
    }
}

fn raw(x: &[f64], y: &[f64]) -> (f64, f64) {
    let a2: f64 = x.iter().chain(y).map(|c| c * c).sum();
    let b: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
    (a2, b)
}

fn psi_raw(t: f64, a2: f64, b: f64) -> f64 {
    t + (a2 * (2.0 * t).cos() - 2.0 * b) / (2.0 * (2.0 * t).sin())
}

fn psi_prime_raw(t: f64, a2: f64, b: f64) -> f64 {
    let (s, c) = (2.0 * t).sin_cos();
    1.0 + (2.0 * b * c - a2) / (s * s)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All sign changes of ψ' on a fine grid of (0, π/2), refined by bisection.
fn raw_roots(a2: f64, b: f64) -> Vec<f64> {
    let m = 20000;
    let grid: Vec<f64> = (1..m).map(|i| FRAC_PI_2 * i as f64 / m as f64).collect();
    grid.windows(2)
        .filter(|w| psi_prime_raw(w[0], a2, b).signum() != psi_prime_raw(w[1], a2, b).signum())
        .map(|w| bisect(|t| psi_prime_raw(t, a2, b), w[0], w[1]))
        .collect()
}

const PAIRS: [([f64; 2], [f64; 2]); 6] = [
    ([0.3, 0.1], [-0.2, 0.4]),
    ([0.7, 0.3], [0.6, 0.5]),
    ([0.9, 0.0], [0.8, 0.2]),
    ([0.1, -0.5], [0.4, 0.4]),
    ([0.65, 0.45], [0.55, 0.6]),
    ([0.0, 0.8], [0.3, 0.75]),
];

#[test]
fn phase_matches_raw_formula() {
    for (x, y) in PAIRS {
        let (a2, b) = raw(&x, &y);
        for t in [0.1, 0.4, 0.7, 1.0, 1.3] {
            let got = psi(t, &x, &y).unwrap();
            let want = psi_raw(t, a2, b);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "ψ({t}): {got} vs {want}");
            let d = psi_prime(t, &x, &y).unwrap();
            let dw = psi_prime_raw(t, a2, b);
            assert!((d - dw).abs() <= 1e-11 * dw.abs().max(1.0), "ψ'({t}): {d} vs {dw}");
        }
    }
}

#[test]
fn critical_points_match_bisection() {
    for (x, y) in PAIRS {
        let (a2, b) = raw(&x, &y);
        let g = phase_geometry(&x, &y).unwrap();
        let mut lib: Vec<f64> = [g.t1, g.t2_any].into_iter().flatten().map(|r| r.t).filter(|t| *t > 0.0 && *t < FRAC_PI_2).collect();
        lib.sort_by(f64::total_cmp);
        let found = raw_roots(a2, b);
        assert_eq!(lib.len(), found.len(), "x={x:?} y={y:?}: {lib:?} vs {found:?}");
        for (a, b) in lib.iter().zip(&found) {
            assert!((a - b).abs() < 1e-10, "root {a} vs {b}");
        }
    }
}

/// Critical value at t₁ from bisection on the raw derivative.
fn critical_value_raw(x: &[f64], y: &[f64]) -> f64 {
    let (a2, b) = raw(x, y);
    let roots = raw_roots(a2, b);
    let t = roots[0];
    psi_raw(t, a2, b)
}

#[test]
fn mixed_hessian_matches_independent_differences() {
    let x = [0.3, 0.1];
    let y = [-0.2, 0.4];
    let data = curvature_and_hessian(&x, &y, CriticalPoint::First).unwrap();
    let h = 1e-4;
    for k in 0..2 {
        for l in 0..2 {
            let f = |sx: f64, sy: f64| {
                let mut xp = x;
                let mut yp = y;
                xp[k] += sx * h;
                yp[l] += sy * h;
                critical_value_raw(&xp, &yp)
            };
            let fd = (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / (4.0 * h * h);
            let exact = data.mixed[k][l];
            assert!((fd - exact).abs() < 1e-5 * exact.abs().max(1.0), "({k},{l}): {fd} vs {exact}");
        }
    }
}
