//! Geometry of the Mehler phase
//!
//! ψ(t, x, y) = t + ((|x|²+|y|²) cos 2t - 2 x·y) / (2 sin 2t)
//!
//! on 0 < t < π/2, evaluated in the cancellation free form
//! (2-a²)t/2 + (a²/2)(t - tan t) + |x-y|²/(2 sin 2t) with a² = |x|²+|y|².

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const CLAMP: f64 = 1e-12;
const POLE_GUARD: f64 = 1e-12;
const FACTOR_POLE_GUARD: f64 = 1e-6;
const CRITICAL_SIN_MIN: f64 = 1e-8;

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::Domain("x and y must have the same positive dimension".into()));
    }
    Ok(())
}

fn check_pole(t: f64, guard: f64) -> Result<f64> {
    let s = (2.0 * t).sin();
    if !(t > 0.0 && t < FRAC_PI_2) || s.abs() < guard {
        return Err(Error::PoleProximity { t });
    }
    Ok(s)
}

/// ψ(t, x, y) for real t in (0, π/2).
pub fn psi(t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    check_pole(t, POLE_GUARD)?;
    let a2 = dot(x, x) + dot(y, y);
    Ok(psi_scalar(t, a2, dist2(x, y)))
}

pub(crate) fn psi_scalar(t: f64, a2: f64, d2: f64) -> f64 {
    (2.0 - a2) * t / 2.0 + 0.5 * a2 * (t - t.tan()) + d2 / (2.0 * (2.0 * t).sin())
}

/// ψ at complex t, for contour deformations of the kernel integral.
pub fn psi_complex(t: Complex64, a2: f64, d2: f64) -> Complex64 {
    t * ((2.0 - a2) / 2.0) + (t - t.tan()) * (0.5 * a2) + d2 / ((t * 2.0).sin() * 2.0)
}

/// ∂_t ψ = -(a² - 1 - 2b cos 2t + cos² 2t) / sin² 2t.
pub fn psi_prime(t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    let s = check_pole(t, POLE_GUARD)?;
    let c = (2.0 * t).cos();
    let a2 = dot(x, x) + dot(y, y);
    let b = dot(x, y);
    Ok(-(a2 - 1.0 - 2.0 * b * c + c * c) / (s * s))
}

/// ∂_t² ψ = -4 (b + b cos² 2t - a² cos 2t) / sin³ 2t.
pub fn psi_second(t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    let s = check_pole(t, POLE_GUARD)?;
    let c = (2.0 * t).cos();
    let a2 = dot(x, x) + dot(y, y);
    let b = dot(x, y);
    Ok(-4.0 * (b + b * c * c - a2 * c) / (s * s * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriticalPoint {
    /// cos 2t₁ = b + √D
    First,
    /// cos 2t₂ = b - √D
    Second,
}

/// One root of ∂_t ψ on [0, π/2).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Root {
    pub t: f64,
    pub cos2t: f64,
    pub sin2t: f64,
    /// ∂_t²ψ at the root: +4√D/sin 2t₁ or -4√D/sin 2t₂.
    pub curvature: f64,
}

/// Scalars describing the critical points of ψ(·, x, y).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseGeometry {
    pub a2: f64,
    pub b: f64,
    pub d: f64,
    pub dist: f64,
    /// Present when D >= 0 and b + √D <= 1.
    pub t1: Option<Root>,
    /// Present when D >= 0 and b >= √D, so that t₂ lies in [0, π/4].
    pub t2: Option<Root>,
    /// The second root whenever b - √D lies in (-1, 1), without the sign condition.
    pub t2_any: Option<Root>,
}

impl PhaseGeometry {
    pub fn root(&self, which: CriticalPoint) -> Option<Root> {
        match which {
            CriticalPoint::First => self.t1,
            CriticalPoint::Second => self.t2,
        }
    }
}

fn angle(c: f64, s: f64) -> f64 {
    if c >= 0.7 {
        0.5 * s.asin()
    } else {
        0.5 * c.acos()
    }
}

/// Critical point data from a² = |x|²+|y|², b = x·y and d² = |x-y|² = a² - 2b.
pub fn geometry_from_scalars(a2: f64, b: f64, d2: f64) -> PhaseGeometry {
    let d = b * b - a2 + 1.0;
    let mut g = PhaseGeometry { a2, b, d, dist: d2.max(0.0).sqrt(), t1: None, t2: None, t2_any: None };
    if d < -CLAMP {
        return g;
    }
    let sd = d.max(0.0).sqrt();
    let denom = 1.0 - b + sd;

    let c1 = b + sd;
    if c1 <= 1.0 + CLAMP && c1 > -1.0 {
        let c1 = c1.min(1.0);
        // sin² 2t₁ = |x-y|² (1 + 2b/(1 - b + √D)) avoids the cancellation in 1 - cos²
        let s1 = if c1 == 1.0 {
            0.0
        } else if denom > 1e-8 {
            (d2 * (1.0 + 2.0 * b / denom)).max(0.0).sqrt()
        } else {
            ((1.0 - c1) * (1.0 + c1)).max(0.0).sqrt()
        };
        g.t1 = Some(Root { t: angle(c1, s1), cos2t: c1, sin2t: s1, curvature: 4.0 * sd / s1 });
    }

    let c2 = b - sd;
    if c2 > -1.0 && c2 < 1.0 {
        let s2 = if c2.abs() < 0.9 {
            ((1.0 - c2) * (1.0 + c2)).sqrt()
        } else {
            (d2 + 2.0 * b * denom).max(0.0).sqrt()
        };
        let r = Root { t: angle(c2, s2), cos2t: c2, sin2t: s2, curvature: -4.0 * sd / s2 };
        g.t2_any = Some(r);
        if b >= sd - CLAMP {
            g.t2 = Some(r);
        }
    }
    g
}

pub fn phase_geometry(x: &[f64], y: &[f64]) -> Result<PhaseGeometry> {
    check_dims(x, y)?;
    let a2 = dot(x, x) + dot(y, y);
    Ok(geometry_from_scalars(a2, dot(x, y), dist2(x, y)))
}

/// ∂_t ψ as -4/sin² 2t · sin(t+t₁) sin(t-t₁) sin(t+t₂) sin(t-t₂).
///
/// The second root is taken without its sign condition, since the identity
/// only needs both cosines b ± √D in [-1, 1].
pub fn psi_prime_factored_from(t: f64, g: &PhaseGeometry) -> Result<f64> {
    let (Some(r1), Some(r2)) = (g.t1, g.t2_any) else {
        return Err(Error::DegenerateGeometry("ψ' has fewer than two real roots".into()));
    };
    let s = check_pole(t, FACTOR_POLE_GUARD)?;
    let p = (t + r1.t).sin() * (t - r1.t).sin() * (t + r2.t).sin() * (t - r2.t).sin();
    Ok(-4.0 * p / (s * s))
}

/// (closed form ψ', factored ψ') at t.
pub fn psi_prime_factored(t: f64, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let g = phase_geometry(x, y)?;
    let f = psi_prime_factored_from(t, &g)?;
    Ok((psi_prime(t, x, y)?, f))
}

/// Data at one critical point: ψ, ψ'', the mixed Hessian and its spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalData {
    pub which: CriticalPoint,
    pub t: f64,
    pub psi_at_crit: f64,
    pub psi2: f64,
    /// Row k, column l holds ∂_{x_k}∂_{y_l}.
    pub mixed: Vec<Vec<f64>>,
    /// Sorted real parts of the eigenvalues.
    pub spectrum: Vec<f64>,
    /// Largest imaginary part seen, which should vanish.
    pub spectrum_imag: f64,
}

fn critical_root(g: &PhaseGeometry, which: CriticalPoint) -> Result<Root> {
    let r = g
        .root(which)
        .ok_or_else(|| Error::DegenerateGeometry(format!("critical point {which:?} does not exist")))?;
    if r.sin2t <= CRITICAL_SIN_MIN {
        return Err(Error::DegenerateGeometry(format!("sin 2t at {which:?} is {:e}", r.sin2t)));
    }
    Ok(r)
}

/// Closed form of the mixed Hessian at the chosen critical point:
/// ±(x - y cos 2t)(x cos 2t - y)ᵀ/(√D sin³ 2t) - I/sin 2t.
pub fn mixed_hessian(x: &[f64], y: &[f64], which: CriticalPoint) -> Result<DMatrix<f64>> {
    let g = phase_geometry(x, y)?;
    let r = critical_root(&g, which)?;
    let n = x.len();
    let (c, s) = (r.cos2t, r.sin2t);
    let sd = g.d.max(0.0).sqrt();
    if sd == 0.0 {
        return Err(Error::DegenerateGeometry("D = 0".into()));
    }
    let sign = match which {
        CriticalPoint::First => 1.0,
        CriticalPoint::Second => -1.0,
    };
    let mut h = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let u = x[k] - y[k] * c;
            let v = x[l] * c - y[l];
            h[(k, l)] = sign * u * v / (sd * s * s * s);
        }
        h[(k, k)] -= 1.0 / s;
    }
    Ok(h)
}

pub fn curvature_and_hessian(x: &[f64], y: &[f64], which: CriticalPoint) -> Result<CriticalData> {
    let g = phase_geometry(x, y)?;
    let r = critical_root(&g, which)?;
    let h = mixed_hessian(x, y, which)?;
    let mixed = (0..h.nrows()).map(|k| h.row(k).iter().copied().collect()).collect();
    let (spectrum, spectrum_imag) = spectrum(h);
    Ok(CriticalData {
        which,
        t: r.t,
        psi_at_crit: psi_scalar(r.t, g.a2, g.dist * g.dist),
        psi2: r.curvature,
        mixed,
        spectrum,
        spectrum_imag,
    })
}

/// Sorted real parts of a real matrix's eigenvalues and the largest |imag|.
pub fn spectrum(h: DMatrix<f64>) -> (Vec<f64>, f64) {
    let ev = h.complex_eigenvalues();
    let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    let im = ev.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    (re, im)
}

/// ψ(t_i(x, y), x, y) as a function of (x, y).
pub fn critical_value(x: &[f64], y: &[f64], which: CriticalPoint) -> Result<f64> {
    let g = phase_geometry(x, y)?;
    let r = critical_root(&g, which)?;
    Ok(psi_scalar(r.t, g.a2, g.dist * g.dist))
}

/// Central difference mixed Hessian of the critical value with step h.
pub fn mixed_hessian_fd(x: &[f64], y: &[f64], which: CriticalPoint, h: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let mut f = [0.0; 4];
            for (i, (sx, sy)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].iter().enumerate() {
                let mut xp = x.to_vec();
                let mut yp = y.to_vec();
                xp[k] += sx * h;
                yp[l] += sy * h;
                f[i] = critical_value(&xp, &yp, which)?;
            }
            out[(k, l)] = (f[0] - f[1] - f[2] + f[3]) / (4.0 * h * h);
        }
    }
    Ok(out)
}

/// ψ(t₁, x, y)/|x-y|, which tends to √(1-|x|²) as y → x.
pub fn zeta(x: &[f64], y: &[f64]) -> Result<f64> {
    let g = phase_geometry(x, y)?;
    if g.dist == 0.0 {
        let r2 = dot(x, x);
        if r2 >= 1.0 {
            return Err(Error::DegenerateGeometry("diagonal point outside the unit ball".into()));
        }
        return Ok((1.0 - r2).sqrt());
    }
    let r = g.t1.ok_or_else(|| Error::DegenerateGeometry("first critical point does not exist".into()))?;
    Ok(psi_scalar(r.t, g.a2, g.dist * g.dist) / g.dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn raw(t: f64, x: &[f64], y: &[f64]) -> f64 {
        let a2 = dot(x, x) + dot(y, y);
        t + (a2 * (2.0 * t).cos() - 2.0 * dot(x, y)) / (2.0 * (2.0 * t).sin())
    }

    #[test]
    fn stable_form_matches_raw() {
        let (x, y) = ([0.3, -0.2], [0.1, 0.5]);
        for &t in &[0.05, 0.3, 0.7, 1.2] {
            assert!((psi(t, &x, &y).unwrap() - raw(t, &x, &y)).abs() < 1e-13);
        }
    }

    #[test]
    fn simple_values() {
        let (x, y) = ([0.3, 0.1], [-0.2, 0.4]);
        let b = dot(&x, &y);
        assert!((psi(FRAC_PI_4, &x, &y).unwrap() - (FRAC_PI_4 - b)).abs() < 1e-15);
        assert!((psi(0.4, &[0.0], &[0.0]).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn roots_solve_psi_prime() {
        let (x, y) = ([0.7, 0.2], [0.65, 0.3]);
        let g = phase_geometry(&x, &y).unwrap();
        for r in [g.t1.unwrap(), g.t2.unwrap()] {
            assert!(psi_prime(r.t, &x, &y).unwrap().abs() < 1e-10);
            assert!((psi_second(r.t, &x, &y).unwrap() - r.curvature).abs() < 1e-8 * r.curvature.abs());
            let (_, f) = psi_prime_factored(r.t, &x, &y).unwrap();
            assert!(f.abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_example() {
        let x = [FRAC_1_SQRT_2, 0.0];
        let g = phase_geometry(&x, &x).unwrap();
        assert!((g.a2 - 1.0).abs() < 1e-15 && (g.b - 0.5).abs() < 1e-15 && (g.d - 0.25).abs() < 1e-15);
        assert_eq!(g.t1.unwrap().t, 0.0);
        assert!((g.t2.unwrap().t - FRAC_PI_4).abs() < 1e-7);
        let c = curvature_and_hessian(&x, &x, CriticalPoint::Second).unwrap();
        assert!((c.psi2 + 2.0).abs() < 1e-12);
        assert!((c.spectrum[0] + 1.0).abs() < 1e-12 && c.spectrum[1].abs() < 1e-12);
        assert!(curvature_and_hessian(&x, &x, CriticalPoint::First).is_err());
    }

    #[test]
    fn origin_has_only_first_root() {
        let g = phase_geometry(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(g.t1.unwrap().t, 0.0);
        assert!(g.t2.is_none());
    }

    #[test]
    fn pole_rejected() {
        assert!(matches!(psi(0.0, &[0.1], &[0.2]), Err(Error::PoleProximity { .. })));
        assert!(matches!(psi_prime_factored(1e-8, &[0.7, 0.2], &[0.65, 0.3]), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn zeta_limit_on_diagonal() {
        let x = [0.3, 0.4];
        let y = [0.3 + 1e-7, 0.4 - 1e-7];
        assert!((zeta(&x, &y).unwrap() - (1.0f64 - 0.25).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn no_roots_when_discriminant_negative() {
        // a² > 1 + b² gives D < 0
        let g = phase_geometry(&[0.9, 0.0], &[0.0, 0.9]).unwrap();
        assert!(g.d < 0.0 && g.t1.is_none() && g.t2.is_none());
    }
}
