//! Oscillatory integral representation of the spectral projection kernel.
//!
//! In rescaled coordinates (physical points λx, λy with R = λ²)
//!
//! K_R(x, y) = (1/π) ∫_{-π/2}^{π/2} (2πi sin 2s)^{-n/2} e^{iRψ(s,x,y)} ds,
//!
//! split with the cutoff ρ₀ into four parts. With
//! J(σ, y') = ∫_0^{3π/8} (sin 2t)^{-n/2} ρ₀(t) e^{iσRψ(t,x,y')} dt and
//! C_n = (1/π)(2π)^{-n/2} e^{-iπn/4}:
//!
//! - I0  = C_n J(+, y)
//! - I0m = C_n e^{iπn/2} J(-, y)
//! - I1  = C_n e^{iπ(n-R)/2} J(+, -y)
//! - I1m = C_n e^{iπR/2} J(-, -y)
//!
//! J(-, ·) is the complex conjugate of J(+, ·) for real points.

use std::f64::consts::{FRAC_PI_8, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{dist2, dot, geometry_from_scalars, psi_complex, psi_scalar, phase_geometry, CriticalPoint};
use crate::quad::{adaptive_complex, AdaptiveOptions};
use crate::spectral::projection_kernel_direct;
use crate::sum::ComplexSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelPart {
    I0,
    I0Minus,
    I1,
    I1Minus,
}

pub const ALL_PARTS: [KernelPart; 4] = [KernelPart::I0, KernelPart::I0Minus, KernelPart::I1, KernelPart::I1Minus];

/// A kernel evaluation request in rescaled coordinates.
#[derive(Debug, Clone)]
pub struct KernelQuery {
    pub n: usize,
    pub r: u64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub parts: Vec<KernelPart>,
}

impl KernelQuery {
    pub fn new(n: usize, r: u64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if n == 0 || r < n as u64 || !(r - n as u64).is_multiple_of(2) {
            return Err(Error::ParityMismatch { n, lambda_sq: r });
        }
        if x.len() != n || y.len() != n {
            return Err(Error::Domain("points must have dimension n".into()));
        }
        if dot(&x, &x) > 4.0 || dot(&y, &y) > 4.0 {
            return Err(Error::Domain("rescaled points must satisfy |x|, |y| <= 2".into()));
        }
        Ok(Self { n, r, x, y, parts: ALL_PARTS.to_vec() })
    }

    pub fn with_parts(mut self, parts: &[KernelPart]) -> Self {
        self.parts = parts.to_vec();
        self
    }

    pub fn lambda(&self) -> f64 {
        (self.r as f64).sqrt()
    }

    fn part_setup(&self, part: KernelPart) -> (f64, Complex64) {
        let n = self.n as f64;
        let cn = normalization(self.n);
        let e = |theta: f64| Complex64::from_polar(1.0, theta);
        match part {
            KernelPart::I0 => (1.0, cn),
            KernelPart::I0Minus => (1.0, cn * e(PI * n / 2.0)),
            // e^{iπ(n-R)/2} with R reduced mod 4 to keep the angle exact
            KernelPart::I1 => (-1.0, cn * e(PI * ((self.n as i64 - (self.r % 4) as i64) as f64) / 2.0)),
            KernelPart::I1Minus => (-1.0, cn * e(PI * ((self.r % 4) as f64) / 2.0)),
        }
    }
}

fn sigma(part: KernelPart) -> f64 {
    match part {
        KernelPart::I0 | KernelPart::I1 => 1.0,
        KernelPart::I0Minus | KernelPart::I1Minus => -1.0,
    }
}

/// C_n = (1/π)(2π)^{-n/2} e^{-iπn/4}.
pub fn normalization(n: usize) -> Complex64 {
    let n = n as f64;
    Complex64::from_polar((2.0 * PI).powf(-n / 2.0) / PI, -PI * n / 4.0)
}

/// 35u⁴ - 84u⁵ + 70u⁶ - 20u⁷, the C³ step from 0 to 1 with S(u) + S(1-u) = 1.
fn smoothstep(u: f64) -> f64 {
    let u2 = u * u;
    u2 * u2 * (35.0 - 84.0 * u + 70.0 * u2 - 20.0 * u2 * u)
}

/// Even cutoff equal to 1 on |t| <= π/8 and 0 on |t| >= 3π/8,
/// with ρ₀(t) + ρ₀(π/2 - t) = 1 on [0, π/2].
pub fn cutoff_rho0(t: f64) -> f64 {
    let a = t.abs();
    if a <= FRAC_PI_8 {
        1.0
    } else if a >= 3.0 * FRAC_PI_8 {
        0.0
    } else {
        1.0 - smoothstep((a - FRAC_PI_8) / (2.0 * FRAC_PI_8))
    }
}

/// Result of [`kernel_quadrature`].
#[derive(Debug, Clone, Serialize)]
pub struct KernelValue {
    pub re: f64,
    pub im: f64,
    pub parts: Vec<(KernelPart, f64, f64)>,
    pub error: f64,
    pub evaluations: usize,
}

impl KernelValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

const DYADIC_LEVELS: i32 = 40;

/// J(+, y') by quadrature, for y' = sign·y.
///
/// On (0, π/8] the contour t(w) = τw²(1 - iκ(1-w²)) leaves the real axis
/// into the half plane where e^{iRψ} decays at t → 0, so the oscillation
/// of |x-y'|²/(2 sin 2t) is traded for super-exponential decay; dyadic
/// panels in w resolve the approach to 0. The squared parametrization also
/// makes the n = 1 diagonal integrand smooth. κ = min(1, 20/(Rτ)) bounds the
/// growth of the remaining terms by e^5. The rest of the support is real.
fn j_plus(q: &KernelQuery, sign: f64, opts: AdaptiveOptions) -> Result<(Complex64, f64, usize)> {
    let x = &q.x;
    let y: Vec<f64> = q.y.iter().map(|v| sign * v).collect();
    let a2 = dot(x, x) + dot(&y, &y);
    let d2 = dist2(x, &y);
    let r = q.r as f64;
    let half_n = q.n as f64 / 2.0;
    if q.n >= 2 && r * d2 < 1e-8 {
        return Err(Error::NearDiagonal);
    }
    let tau = FRAC_PI_8;
    let kappa = (20.0 / (r * tau)).min(1.0);
    let contour = |w: f64| {
        let w2 = w * w;
        let t = Complex64::new(tau * w2, -tau * kappa * w2 * (1.0 - w2));
        let dt = Complex64::new(2.0 * tau * w, -2.0 * tau * kappa * w * (1.0 - 2.0 * w2));
        let expo = Complex64::i() * r * psi_complex(t, a2, d2) - (t * 2.0).sin().ln() * half_n;
        if expo.re < -745.0 {
            return Complex64::new(0.0, 0.0);
        }
        expo.exp() * dt
    };
    let mut breaks: Vec<f64> = (1..=DYADIC_LEVELS).rev().map(|k| 2f64.powi(-k)).collect();
    breaks.insert(0, 0.0);
    breaks.push(1.0);
    let near = adaptive_complex(contour, &breaks, opts)?;

    let real = |t: f64| {
        let s = (2.0 * t).sin();
        Complex64::from_polar(s.powf(-half_n) * cutoff_rho0(t), r * psi_scalar(t, a2, d2))
    };
    let panels = ((r / 8.0).ceil() as usize).clamp(4, 4096);
    let lo = tau;
    let hi = 3.0 * tau;
    let rb: Vec<f64> = (0..=panels).map(|i| lo + (hi - lo) * i as f64 / panels as f64).collect();
    let far = adaptive_complex(real, &rb, opts)?;
    Ok((near.value + far.value, near.error + far.error, near.evaluations + far.evaluations))
}

/// The requested parts of K_R(x, y) by contour quadrature.
///
/// `tol` is a relative tolerance for the kernel; the absolute floor scales
/// with the typical kernel size R^{(n-2)/2}.
pub fn kernel_quadrature(q: &KernelQuery, tol: f64) -> Result<KernelValue> {
    let scale = (q.r as f64).powf(q.n as f64 / 2.0 - 1.0);
    let opts = AdaptiveOptions { abs_tol: 1e-3 * tol * scale, rel_tol: tol, max_panels: 50_000 };
    let mut cache: [Option<(Complex64, f64, usize)>; 2] = [None, None];
    let mut total = ComplexSum::new();
    let mut parts = Vec::new();
    let mut error = 0.0;
    let mut evaluations = 0;
    for &part in &q.parts {
        let (ysign, pref) = q.part_setup(part);
        let slot = if ysign > 0.0 { 0 } else { 1 };
        if cache[slot].is_none() {
            let v = j_plus(q, ysign, opts)?;
            evaluations += v.2;
            cache[slot] = Some(v);
        }
        let (jp, err, _) = cache[slot].expect("filled above");
        let j = if sigma(part) > 0.0 { jp } else { jp.conj() };
        let v = pref * j;
        error += pref.norm() * err;
        total.add(v);
        parts.push((part, v.re, v.im));
    }
    let value = total.value();
    Ok(KernelValue { re: value.re, im: value.im, parts, error, evaluations })
}

/// R^{-1/2} D^{-1/4} (sin 2t_i)^{-(n-1)/2} e^{iRψ(t_i)}.
pub fn leading_term(q: &KernelQuery, which: CriticalPoint) -> Result<Complex64> {
    let g = phase_geometry(&q.x, &q.y)?;
    let root = g
        .root(which)
        .ok_or_else(|| Error::DegenerateGeometry(format!("critical point {which:?} does not exist")))?;
    if root.sin2t <= 1e-6 {
        return Err(Error::DegenerateGeometry(format!("sin 2t = {:e} at {which:?}", root.sin2t)));
    }
    let r = q.r as f64;
    let modulus = r.powf(-0.5) * g.d.powf(-0.25) * root.sin2t.powf(-(q.n as f64 - 1.0) / 2.0);
    Ok(Complex64::from_polar(modulus, r * psi_scalar(root.t, g.a2, g.dist * g.dist)))
}

/// Sum over parts and over critical points in (0, 3π/8) of the one term
/// stationary phase approximation of each part.
pub fn stationary_phase_model(q: &KernelQuery) -> Result<Complex64> {
    let r = q.r as f64;
    let half_n = q.n as f64 / 2.0;
    let a2 = dot(&q.x, &q.x) + dot(&q.y, &q.y);
    let b = dot(&q.x, &q.y);
    let mut total = ComplexSum::new();
    for &part in &q.parts {
        let (ysign, pref) = q.part_setup(part);
        let s = sigma(part);
        let yp: Vec<f64> = q.y.iter().map(|v| ysign * v).collect();
        let g = geometry_from_scalars(a2, ysign * b, dist2(&q.x, &yp));
        for root in [g.t1, g.t2_any].into_iter().flatten() {
            if !(root.t > 0.0 && root.t < 3.0 * FRAC_PI_8) || root.sin2t <= 1e-8 || !root.curvature.is_finite() {
                continue;
            }
            let amp = cutoff_rho0(root.t) * root.sin2t.powf(-half_n) * (2.0 * PI / (r * root.curvature.abs())).sqrt();
            let ph = s * PI / 4.0 * root.curvature.signum() + s * r * psi_scalar(root.t, g.a2, g.dist * g.dist);
            total.add(pref * Complex64::from_polar(amp, ph));
        }
    }
    Ok(total.value())
}

/// How [`kernel_bound_check`] draws its sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundSampleSpec {
    pub mu: f64,
    pub count: usize,
    pub seed: u64,
    /// Relative spread of 1-|x| around μ and of |x-y| as a fraction of μ.
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub kernel: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelBoundReport {
    pub n: usize,
    pub r: u64,
    pub mu: f64,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub samples: Vec<KernelSample>,
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r2 = dot(&v, &v);
        if r2 > 1e-6 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

/// Samples |K_R(x, y)| / (Rμ)^{(n-2)/2} with 1-|x| ≈ 1-|y| ≈ μ using the
/// direct spectral sum. Every other sample lies on the diagonal, where the
/// kernel is largest.
pub fn kernel_bound_check(n: usize, r: u64, spec: &BoundSampleSpec) -> Result<KernelBoundReport> {
    if !(spec.mu > 0.0 && spec.mu <= 1.0) || spec.count == 0 {
        return Err(Error::Domain("need 0 < μ <= 1 and a positive sample count".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lambda = (r as f64).sqrt();
    let norm = (r as f64 * spec.mu).powf((n as f64 - 2.0) / 2.0);
    let mut samples = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let radius = (1.0 - spec.mu * (1.0 + spec.spread * rng.random_range(-1.0..1.0))).max(0.0);
        let x: Vec<f64> = random_unit(n, &mut rng).into_iter().map(|c| c * radius).collect();
        let y = if i % 2 == 0 {
            x.clone()
        } else {
            let off = random_unit(n, &mut rng);
            let len = spec.spread * spec.mu * rng.random_range(0.0..1.0);
            x.iter().zip(&off).map(|(a, o)| a + len * o).collect()
        };
        let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        let k = projection_kernel_direct(n, r, &xs, &ys)?;
        samples.push(KernelSample { x, y, kernel: k, ratio: k.abs() / norm });
    }
    let mut ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    Ok(KernelBoundReport {
        n,
        r,
        mu: spec.mu,
        max_ratio: *ratios.last().expect("count > 0"),
        median_ratio: ratios[ratios.len() / 2],
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_partition_of_unity() {
        for i in 0..=200 {
            let t = std::f64::consts::FRAC_PI_2 * i as f64 / 200.0;
            assert!((cutoff_rho0(t) + cutoff_rho0(std::f64::consts::FRAC_PI_2 - t) - 1.0).abs() < 1e-14);
            assert_eq!(cutoff_rho0(t), cutoff_rho0(-t));
        }
        assert_eq!(cutoff_rho0(0.1), 1.0);
        assert_eq!(cutoff_rho0(1.2), 0.0);
    }

    #[test]
    fn parity_violation_rejected() {
        assert!(matches!(KernelQuery::new(1, 22, vec![0.0], vec![0.0]), Err(Error::ParityMismatch { .. })));
    }

    #[test]
    fn origin_value_n1() {
        let q = KernelQuery::new(1, 21, vec![0.0], vec![0.0]).unwrap();
        let v = kernel_quadrature(&q, 1e-10).unwrap();
        let d = projection_kernel_direct(1, 21, &[0.0], &[0.0]).unwrap();
        assert!((v.re - 0.138_84).abs() < 1e-5);
        assert!((v.re - d).abs() < 1e-9 && v.im.abs() < 1e-9);
    }

    #[test]
    fn near_diagonal_refused_for_n2() {
        let q = KernelQuery::new(2, 102, vec![0.3, 0.1], vec![0.3, 0.1]).unwrap();
        assert!(matches!(kernel_quadrature(&q, 1e-8), Err(Error::NearDiagonal)));
    }

    #[test]
    fn leading_modulus_example() {
        let x = vec![std::f64::consts::FRAC_1_SQRT_2, 0.0];
        let q = KernelQuery::new(2, 100, x.clone(), x).unwrap();
        let v = leading_term(&q, CriticalPoint::Second).unwrap();
        assert!((v.norm() - 0.1 * 2f64.sqrt()).abs() < 1e-12);
    }
}
