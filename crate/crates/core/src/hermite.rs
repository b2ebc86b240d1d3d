//! Normalized Hermite functions h_k(x) = H_k(x) e^{-x^2/2} / sqrt(2^k k! sqrt(pi)).
//!
//! Values come from the three term recurrence for the normalized functions,
//! carried as a mantissa and a binary exponent so that neither the Gaussian
//! seed nor the growth in the forbidden region leaves the f64 range.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

const RESCALE_BITS: i32 = 600;

/// x * 2^e without overflow in the intermediate power.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return 0.0;
        }
    }
    x * 2f64.powi(e as i32)
}

/// pi^{-1/4} e^{-x^2/2} as (mantissa, binary exponent).
fn seed(x: f64) -> (f64, i64) {
    let log = -0.5 * x * x - 0.25 * PI.ln();
    if log > -700.0 {
        return (log.exp(), 0);
    }
    let e = (log / std::f64::consts::LN_2).floor();
    let m = (log - e * std::f64::consts::LN_2).exp();
    (m, e as i64)
}

/// Runs the recurrence up to order `k_max`, handing each h_k(x) to `emit`.
fn recurrence(k_max: usize, x: f64, mut emit: impl FnMut(usize, f64)) {
    let (mut h, mut e) = seed(x);
    let mut prev = 0.0;
    for k in 0..=k_max {
        emit(k, ldexp(h, e));
        if k == k_max {
            break;
        }
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * h - (kf / (kf + 1.0)).sqrt() * prev;
        prev = h;
        h = next;
        if h.abs() > 2f64.powi(RESCALE_BITS) {
            h *= 2f64.powi(-RESCALE_BITS);
            prev *= 2f64.powi(-RESCALE_BITS);
            e += RESCALE_BITS as i64;
        }
    }
}

/// h_k(x).
pub fn hermite_normalized(k: usize, x: f64) -> f64 {
    let mut out = 0.0;
    recurrence(k, x, |j, v| {
        if j == k {
            out = v;
        }
    });
    out
}

/// [h_0(x), ..., h_{k_max}(x)].
pub fn hermite_batch(k_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    hermite_batch_into(x, &mut out);
    out
}

/// Fills `out[k] = h_k(x)` for every k < out.len().
pub fn hermite_batch_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    recurrence(out.len() - 1, x, |k, v| out[k] = v);
}

/// h_k'(x) = sqrt(k/2) h_{k-1}(x) - sqrt((k+1)/2) h_{k+1}(x).
pub fn hermite_derivative(k: usize, x: f64) -> f64 {
    let h = hermite_batch(k + 1, x);
    let kf = k as f64;
    let lower = if k == 0 { 0.0 } else { (kf / 2.0).sqrt() * h[k - 1] };
    lower - ((kf + 1.0) / 2.0).sqrt() * h[k + 1]
}

/// Turning point sqrt(2k+1) of h_k.
pub fn turning_point(k: usize) -> f64 {
    (2.0 * k as f64 + 1.0).sqrt()
}

/// Which side of the turning point the action is taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// Oscillatory action, defined for every x.
    Minus,
    /// Decay action, defined for |x| >= u.
    Plus,
}

/// int_u^x sqrt(t^2 - u^2) dt for x >= u, via u^2 int_0^w sqrt(v(2+v)) dv.
fn s_plus(u: f64, x: f64) -> f64 {
    let w = x / u - 1.0;
    if w < 0.5 {
        // sqrt(v(2+v)) = sqrt(2) v^{1/2} sum_k binom(1/2,k) (v/2)^k
        let mut total = 0.0;
        let mut binom = 1.0;
        let mut pow = w.sqrt() * w; // w^{3/2}
        let mut k = 0usize;
        loop {
            let term = binom * pow / (k as f64 + 1.5);
            total += term;
            if term.abs() <= 1e-18 * total.abs() || k > 200 {
                break;
            }
            binom *= (0.5 - k as f64) / (k as f64 + 1.0) * 0.5;
            pow *= w;
            k += 1;
        }
        return u * u * std::f64::consts::SQRT_2 * total;
    }
    0.5 * (x * (x * x - u * u).sqrt() - u * u * (x / u).acosh())
}

/// The WKB action s_u^{-} or s_u^{+} at x.
///
/// `Minus` equals (x/2) sqrt(u^2-x^2) + (u^2/2) asin(x/u) inside [-u, u] and
/// continues outside as pi u^2/4 + s^{+}(|x|), odd in x. `Plus` needs |x| >= u
/// and is even in x.
pub fn action_s(u: f64, x: f64, branch: Branch) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() || !x.is_finite() {
        return Err(Error::Domain(format!("action needs u > 0 and finite x, got u={u}, x={x}")));
    }
    let ax = x.abs();
    match branch {
        Branch::Plus => {
            if ax < u {
                return Err(Error::Domain(format!("decay action needs |x| >= u, got x={x}, u={u}")));
            }
            Ok(s_plus(u, ax))
        }
        Branch::Minus => {
            let v = if ax <= u {
                0.5 * (ax * (u * u - ax * ax).sqrt() + u * u * (ax / u).asin())
            } else {
                0.25 * PI * u * u + s_plus(u, ax)
            };
            Ok(v.copysign(x))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeTag {
    Oscillatory,
    Transition,
    Exponential,
}

/// Uncalibrated asymptotic description of h_k near x.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticRegime {
    pub tag: RegimeTag,
    /// (u^2-x^2)^{-1/4}, u^{-1/6}, or e^{-s^+}(x^2-u^2)^{-1/4} by regime.
    pub envelope: f64,
    /// s^- inside and across the transition band, s^+ outside.
    pub phase: f64,
}

/// Regime classification with the band |x| - u within u^{-1/3}.
///
/// Only meaningful for k >= 10.
pub fn szego_eval(k: usize, x: f64) -> AsymptoticRegime {
    let u = turning_point(k);
    let band = u.powf(-1.0 / 3.0);
    let ax = x.abs();
    if ax < u - band {
        AsymptoticRegime {
            tag: RegimeTag::Oscillatory,
            envelope: (u * u - ax * ax).powf(-0.25),
            phase: action_s(u, x, Branch::Minus).expect("u > 0"),
        }
    } else if ax <= u + band {
        AsymptoticRegime {
            tag: RegimeTag::Transition,
            envelope: u.powf(-1.0 / 6.0),
            phase: action_s(u, x, Branch::Minus).expect("u > 0"),
        }
    } else {
        let sp = s_plus(u, ax);
        AsymptoticRegime {
            tag: RegimeTag::Exponential,
            envelope: (-sp).exp() * (ax * ax - u * u).powf(-0.25),
            phase: sp,
        }
    }
}

/// Signed unit-amplitude model of h_k(x) outside the transition band.
///
/// Oscillatory: (-1)^{floor(k/2)} env cos s^- (k even) or sin s^- (k odd).
/// Exponential: sign(x)^k env. Returns None inside the band.
pub fn asymptotic_shape(k: usize, x: f64) -> Option<f64> {
    let r = szego_eval(k, x);
    match r.tag {
        RegimeTag::Oscillatory => {
            let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            let trig = if k.is_multiple_of(2) { r.phase.cos() } else { r.phase.sin() };
            Some(sign * r.envelope * trig)
        }
        RegimeTag::Exponential => {
            let sign = if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
            Some(sign * r.envelope)
        }
        RegimeTag::Transition => None,
    }
}

/// Least squares amplitudes a^- (oscillatory) and a^+ (exponential).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AmplitudeFit {
    pub oscillatory: Option<f64>,
    pub exponential: Option<f64>,
    pub oscillatory_samples: usize,
    pub exponential_samples: usize,
}

/// Fits a = sum(h m) / sum(m^2) separately in the two regimes.
pub fn calibrate_amplitudes(k: usize, xs: &[f64]) -> AmplitudeFit {
    let (mut on, mut od, mut en, mut ed) = (0.0, 0.0, 0.0, 0.0);
    let (mut oc, mut ec) = (0usize, 0usize);
    for &x in xs {
        let r = szego_eval(k, x);
        let Some(m) = asymptotic_shape(k, x) else { continue };
        let h = hermite_normalized(k, x);
        match r.tag {
            RegimeTag::Oscillatory => {
                on += h * m;
                od += m * m;
                oc += 1;
            }
            RegimeTag::Exponential => {
                // scale both by the envelope so deep samples do not vanish
                let s = 1.0 / r.envelope;
                en += h * s * m * s;
                ed += m * s * m * s;
                ec += 1;
            }
            RegimeTag::Transition => {}
        }
    }
    AmplitudeFit {
        oscillatory: (od > 0.0).then(|| on / od),
        exponential: (ed > 0.0).then(|| en / ed),
        oscillatory_samples: oc,
        exponential_samples: ec,
    }
}

/// Gauss–Hermite rule for integrals of x -> f(x) with f already carrying the Gaussian.
///
/// Returns nodes x_i and weights W_i = 1 / (m h_{m-1}(x_i)^2) so that
/// sum W_i h_j(x_i) h_k(x_i) = delta_jk for j + k < 2m.
pub fn hermite_function_rule(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let mf = m as f64;
    let mut weights = Vec::with_capacity(m);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let h = hermite_batch(m, *x);
            let d = (2.0 * mf).sqrt() * h[m - 1] - *x * h[m];
            if d == 0.0 {
                break;
            }
            *x -= h[m] / d;
        }
        let hm1 = hermite_normalized(m - 1, *x);
        weights.push(1.0 / (mf * hm1 * hm1));
    }
    (nodes, weights)
}

/// sqrt(2/pi) and 1/sqrt(2 pi): the limits of a^- and a^+.
pub const AMPLITUDE_OSCILLATORY: f64 = 0.797_884_560_802_865_4;
pub const AMPLITUDE_EXPONENTIAL: f64 = FRAC_1_SQRT_2 * 0.564_189_583_547_756_3;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_closed_form() {
        for &x in &[-2.5f64, -0.3, 0.0, 0.7, 3.1] {
            let g = (-0.5 * x * x).exp() * PI.powf(-0.25);
            assert!((hermite_normalized(0, x) - g).abs() < 1e-15);
            assert!((hermite_normalized(1, x) - 2f64.sqrt() * x * g).abs() < 1e-15);
            let h2 = (4.0 * x * x - 2.0) / (8.0f64).sqrt() * g;
            assert!((hermite_normalized(2, x) - h2).abs() < 1e-15);
        }
    }

    #[test]
    fn parity() {
        for k in [3usize, 10, 57, 300] {
            for &x in &[0.4, 2.2, 9.0] {
                let a = hermite_normalized(k, x);
                let b = hermite_normalized(k, -x);
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(a, s * b);
            }
        }
    }

    #[test]
    fn far_tail_underflows_to_zero_without_nan() {
        let v = hermite_normalized(5, 200.0);
        assert_eq!(v, 0.0);
        let w = hermite_normalized(20_000, 205.0);
        assert!(w.is_finite() && w.abs() < 1.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (k, x, e) = (40usize, 1.3, 1e-5);
        let fd = (hermite_normalized(k, x + e) - hermite_normalized(k, x - e)) / (2.0 * e);
        assert!((hermite_derivative(k, x) - fd).abs() < 1e-7);
    }

    #[test]
    fn gauss_hermite_integrates_gaussian_moments() {
        let (x, w) = hermite_function_rule(30);
        // sum W_i e^{-x_i^2} x_i^2 = sqrt(pi)/2
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * (-x * x).exp() * x * x).sum();
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn action_small_w_series_matches_closed_form() {
        let u = 7.0;
        for &x in &[7.0 * 1.3, 7.0 * 1.49, 7.0 * 1.51] {
            let series = s_plus(u, x);
            let closed = 0.5 * (x * (x * x - u * u).sqrt() - u * u * (x / u).acosh());
            assert!((series - closed).abs() < 1e-12 * closed.abs());
        }
    }

    #[test]
    fn action_rejects_forbidden_plus() {
        assert!(action_s(3.0, 2.0, Branch::Plus).is_err());
        assert!(action_s(0.0, 1.0, Branch::Minus).is_err());
    }

    #[test]
    fn action_leading_term_at_turning_point() {
        let u = 5.0;
        let d = 1e-6;
        let s = action_s(u, u + d, Branch::Plus).unwrap();
        let lead = 2.0 * 2f64.sqrt() / 3.0 * u.sqrt() * d.powf(1.5);
        assert!((s / lead - 1.0).abs() < 1e-6);
    }
}
