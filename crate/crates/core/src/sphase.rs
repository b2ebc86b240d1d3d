//! Explicit stationary phase expansion for ∫ e^{iλφ(t)} a(t) dt with a single
//! nondegenerate critical point at t = 0.
//!
//! With g = φ - φ''(0) t²/2 and a_k = g^k a the expansion reads
//!
//! Σ_{k<2m} Σ_{⌈3k/2⌉ <= j < M} c_kj λ^{k-j-1/2} |φ''|^{-j-1/2} a_k^{(2j)}(0),
//! c_kj = i^{k+j} √(2π) sgn^j e^{iπ sgn/4} / (j! k! 2^j).
//!
//! Derivatives of a_k at the origin come from Chebyshev interpolation on
//! [-B/2, B/2], where B is the scale of the problem.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{adaptive_complex, AdaptiveOptions, Chebyshev};
use crate::sum::ComplexSum;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Phase, amplitude and scale of an oscillatory integral.
#[derive(Clone)]
pub struct SpProblem {
    phase: RealFn,
    amplitude: RealFn,
    phi2: f64,
    scale: f64,
    support: (f64, f64),
    chebyshev_points: usize,
}

impl std::fmt::Debug for SpProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpProblem")
            .field("phi2", &self.phi2)
            .field("scale", &self.scale)
            .field("support", &self.support)
            .finish()
    }
}

impl SpProblem {
    /// `phase` must vanish to second order at 0 with φ''(0) = `phi2`.
    /// The amplitude is supported in `support`, which must contain 0.
    pub fn new(phase: RealFn, amplitude: RealFn, phi2: f64, scale: f64, support: (f64, f64)) -> Result<Self> {
        if phi2 == 0.0 || !phi2.is_finite() {
            return Err(Error::Domain("φ''(0) must be nonzero".into()));
        }
        if !(scale > 0.0) || !(support.0 < 0.0 && support.1 > 0.0) {
            return Err(Error::Domain("scale must be positive and the support must contain 0".into()));
        }
        Ok(Self { phase, amplitude, phi2, scale, support, chebyshev_points: 48 })
    }

    pub fn with_chebyshev_points(mut self, n: usize) -> Self {
        self.chebyshev_points = n.max(8);
        self
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    pub fn phase(&self, t: f64) -> f64 {
        (self.phase)(t)
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        (self.amplitude)(t)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Sampled checks of |φ''(0)| ≈ 1/B, ||φ'''|| ≲ 1/B² and
    /// |t| ≤ |φ''(0)|/||φ'''|| on the support.
    pub fn validate_hypotheses(&self) -> HypothesisReport {
        let (lo, hi) = self.support;
        let h = 1e-3 * self.scale;
        let samples = 400;
        let mut third = 0.0f64;
        for i in 0..=samples {
            let t = lo + (hi - lo) * i as f64 / samples as f64;
            let f = |s: f64| self.phase(s);
            let d3 = (f(t + 2.0 * h) - 2.0 * f(t + h) + 2.0 * f(t - h) - f(t - 2.0 * h)) / (2.0 * h * h * h);
            third = third.max(d3.abs());
        }
        let radius = lo.abs().max(hi);
        let curvature_scale = self.phi2.abs() * self.scale;
        let third_scale = third * self.scale * self.scale;
        let reach = if third > 0.0 { self.phi2.abs() / third } else { f64::INFINITY };
        HypothesisReport {
            curvature_scale,
            third_derivative_scale: third_scale,
            support_radius: radius,
            reach,
            satisfied: (0.125..=8.0).contains(&curvature_scale) && third_scale <= 8.0 && radius <= 1.000_001 * reach,
        }
    }

    fn g(&self, t: f64) -> f64 {
        self.phase(t) - 0.5 * self.phi2 * t * t
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HypothesisReport {
    /// |φ''(0)| B
    pub curvature_scale: f64,
    /// max |φ'''| B²
    pub third_derivative_scale: f64,
    pub support_radius: f64,
    /// |φ''(0)| / max |φ'''|
    pub reach: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionTerm {
    pub k: usize,
    pub j: usize,
    pub derivative: f64,
    pub derivative_error: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Expansion {
    pub lambda: f64,
    pub m: usize,
    pub big_m: usize,
    pub re: f64,
    pub im: f64,
    /// Sum over terms of |coefficient| times the derivative error.
    pub error_estimate: f64,
    pub terms: Vec<ExpansionTerm>,
}

impl Expansion {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |p, k| p * k as f64)
}

/// c_kj without the λ and |φ''| powers.
pub fn coefficient(k: usize, j: usize, sgn: f64) -> Complex64 {
    let i_pow = Complex64::i().powu((k + j) as u32);
    let phase = Complex64::from_polar(1.0, sgn * PI / 4.0);
    i_pow * phase * ((2.0 * PI).sqrt() * sgn.powi(j as i32) / (factorial(j) * factorial(k) * 2f64.powi(j as i32)))
}

/// Expansion with 2m values of k and j below M.
///
/// Fails with a conditioning error when the accumulated derivative error
/// exceeds one percent of the result.
pub fn sp_expansion(p: &SpProblem, lambda: f64, m: usize, big_m: usize) -> Result<Expansion> {
    if m == 0 || big_m == 0 || !(lambda > 0.0) {
        return Err(Error::Domain("need m >= 1, M >= 1 and λ > 0".into()));
    }
    let sgn = p.phi2.signum();
    let q = p.phi2.abs();
    let half = 0.5 * p.scale;
    let mut total = ComplexSum::new();
    let mut err = 0.0;
    let mut terms = Vec::new();
    for k in 0..2 * m {
        let j0 = (3 * k).div_ceil(2);
        if j0 >= big_m {
            continue;
        }
        let cheb = Chebyshev::fit(|t| p.g(t).powi(k as i32) * p.amplitude(t), -half, half, p.chebyshev_points);
        for j in j0..big_m {
            let (d, de) = cheb.derivative(0.0, 2 * j);
            let w = coefficient(k, j, sgn) * (lambda.powf(k as f64 - j as f64 - 0.5) * q.powf(-(j as f64) - 0.5));
            let term = w * d;
            total.add(term);
            err += w.norm() * de;
            terms.push(ExpansionTerm { k, j, derivative: d, derivative_error: de, re: term.re, im: term.im });
        }
    }
    let value = total.value();
    if err > 1e-2 * value.norm() {
        let worst = terms
            .iter()
            .max_by(|a, b| a.derivative_error.total_cmp(&b.derivative_error))
            .expect("at least one term");
        return Err(Error::Conditioning { order: 2 * worst.j, error: err, term: value.norm() });
    }
    Ok(Expansion { lambda, m, big_m, re: value.re, im: value.im, error_estimate: err, terms })
}

/// Reference value of the integral by adaptive quadrature over the support.
pub fn oscillatory_integral(p: &SpProblem, lambda: f64) -> Result<(Complex64, f64)> {
    let (lo, hi) = p.support;
    let panels = ((lambda * (hi - lo) * (hi - lo)).sqrt().ceil() as usize).clamp(4, 4096);
    let breaks: Vec<f64> = (0..=panels).map(|i| lo + (hi - lo) * i as f64 / panels as f64).collect();
    let r = adaptive_complex(
        |t| Complex64::from_polar(p.amplitude(t), lambda * p.phase(t)),
        &breaks,
        AdaptiveOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_panels: 200_000 },
    )?;
    Ok((r.value, r.error))
}

#[derive(Debug, Clone, Serialize)]
pub struct RemainderPoint {
    pub lambda: f64,
    pub exact_re: f64,
    pub exact_im: f64,
    pub expansion_re: f64,
    pub expansion_im: f64,
    pub remainder: f64,
    pub floor: f64,
    pub above_floor: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SlopeStatus {
    /// Least squares slope of log remainder against log λ.
    Slope(f64),
    /// Fewer than three remainders above the roundoff floor.
    Floor,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeReport {
    pub m: usize,
    pub big_m: usize,
    pub status: SlopeStatus,
    pub points: Vec<RemainderPoint>,
}

/// Remainder |I(λ) - expansion| over `lambdas` and its log-log slope.
pub fn sp_remainder_slope(p: &SpProblem, m: usize, big_m: usize, lambdas: &[f64]) -> Result<SlopeReport> {
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let (exact, qerr) = oscillatory_integral(p, lambda)?;
        let e = sp_expansion(p, lambda, m, big_m)?;
        let rem = (exact - e.value()).norm();
        let floor = 10.0 * qerr + 10.0 * e.error_estimate + 1e-13 * exact.norm();
        points.push(RemainderPoint {
            lambda,
            exact_re: exact.re,
            exact_im: exact.im,
            expansion_re: e.re,
            expansion_im: e.im,
            remainder: rem,
            floor,
            above_floor: rem > floor,
        });
    }
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|q| q.above_floor)
        .map(|q| (q.lambda.ln(), q.remainder.ln()))
        .collect();
    let status = if fit.len() < 3 { SlopeStatus::Floor } else { SlopeStatus::Slope(least_squares_slope(&fit)) };
    Ok(SlopeReport { m, big_m, status, points })
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// exp(1 - 1/(1-t²)) on (-1, 1), zero outside; equal to 1 at the origin.
pub fn standard_bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// φ = t²/2 + t³/6 with an asymmetric bump on [-1, 1].
pub fn cubic_problem() -> SpProblem {
    SpProblem::new(
        Arc::new(|t| 0.5 * t * t + t * t * t / 6.0),
        Arc::new(|t| standard_bump(t) * (1.0 + 0.5 * t)),
        1.0,
        1.0,
        (-1.0, 1.0),
    )
    .expect("valid problem")
}

/// φ = t²/2 with the symmetric bump on [-1, 1].
pub fn gaussian_problem() -> SpProblem {
    SpProblem::new(Arc::new(|t| 0.5 * t * t), Arc::new(standard_bump), 1.0, 1.0, (-1.0, 1.0)).expect("valid problem")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_of_leading_term() {
        let c = coefficient(0, 0, 1.0);
        let want = Complex64::from_polar((2.0 * PI).sqrt(), PI / 4.0);
        assert!((c - want).norm() < 1e-15);
        let cm = coefficient(0, 0, -1.0);
        assert!((cm - want.conj()).norm() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_hessian() {
        let e = SpProblem::new(Arc::new(|t| t * t * t), Arc::new(standard_bump), 0.0, 1.0, (-1.0, 1.0));
        assert!(e.is_err());
    }

    #[test]
    fn cubic_hypotheses_hold() {
        let r = cubic_problem().validate_hypotheses();
        assert!(r.satisfied, "{r:?}");
    }

    #[test]
    fn cubic_expansion_matches_quadrature_at_moderate_lambda() {
        let p = cubic_problem();
        let (exact, _) = oscillatory_integral(&p, 1e3).unwrap();
        let e = sp_expansion(&p, 1e3, 2, 7).unwrap();
        assert!((exact - e.value()).norm() < 1e-3 * exact.norm());
    }
}
