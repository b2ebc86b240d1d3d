//! Quadrature rules and Chebyshev interpolation shared by the modules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::{ComplexSum, CompensatedSum};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n.
            let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let mut s = CompensatedSum::new();
        for (x, w) in self.mapped(a, b) {
            s.add(w * f(x));
        }
        s.value()
    }

    pub fn integrate_complex(&self, a: f64, b: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
        let mut s = ComplexSum::new();
        for (x, w) in self.mapped(a, b) {
            s.add(f(x) * w);
        }
        s.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre nodes on [a, b]: `panels` equal panels of `order` nodes each.
pub fn composite_nodes(a: f64, b: f64, panels: usize, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let lo = a + h * p as f64;
        out.extend(rule.mapped(lo, lo + h));
    }
    out
}

/// Tolerances for [`adaptive_complex`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_panels: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    whole: Complex64,
    left: Complex64,
    right: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive bisection with a 15 point Gauss–Legendre rule.
///
/// Each panel is compared against the sum over its two halves; the panel with
/// the largest discrepancy is split until the total falls below tolerance.
/// `breaks` must be increasing and holds the initial panel endpoints.
pub fn adaptive_complex(
    f: impl Fn(f64) -> Complex64,
    breaks: &[f64],
    opts: AdaptiveOptions,
) -> Result<Integral> {
    thread_local! {
        static RULE: GaussLegendre = GaussLegendre::new(15);
    }
    RULE.with(|rule| adaptive_with_rule(&f, breaks, opts, rule))
}

fn adaptive_with_rule(
    f: &impl Fn(f64) -> Complex64,
    breaks: &[f64],
    opts: AdaptiveOptions,
    rule: &GaussLegendre,
) -> Result<Integral> {
    let mut evals = 0usize;
    let mut eval = |a: f64, b: f64| {
        evals += rule.len();
        rule.integrate_complex(a, b, f)
    };
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let m = 0.5 * (a + b);
        let whole = eval(a, b);
        let left = eval(a, m);
        let right = eval(m, b);
        let err = (left + right - whole).norm();
        heap.push(Panel { a, b, whole, left, right, err });
    }
    loop {
        let mut total = ComplexSum::new();
        let mut err = CompensatedSum::new();
        for p in heap.iter() {
            total.add(p.left + p.right);
            err.add(p.err);
        }
        let value = total.value();
        let err = err.value();
        let tol = opts.abs_tol.max(opts.rel_tol * value.norm());
        if err <= tol {
            return Ok(Integral { value, error: err, evaluations: evals });
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::NonConvergence { achieved: err, requested: tol });
        }
        let p = heap.pop().expect("heap is non-empty");
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            return Err(Error::NonConvergence { achieved: err, requested: tol });
        }
        for (a, b, whole) in [(p.a, m, p.left), (m, p.b, p.right)] {
            let c = 0.5 * (a + b);
            let left = eval(a, c);
            let right = eval(c, b);
            let e = (left + right - whole).norm();
            heap.push(Panel { a, b, whole, left, right, err: e });
        }
        let _ = p.whole;
    }
}

/// Real-valued convenience wrapper around [`adaptive_complex`].
pub fn adaptive_real(f: impl Fn(f64) -> f64, breaks: &[f64], opts: AdaptiveOptions) -> Result<f64> {
    adaptive_complex(|x| Complex64::new(f(x), 0.0), breaks, opts).map(|r| r.value.re)
}

/// Chebyshev interpolant on [a, b] sampled at first-kind Chebyshev points.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    pub fn fit(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Self {
        assert!(n >= 2 && b > a);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let vals: Vec<f64> = (0..n)
            .map(|k| f(c + h * (PI * (k as f64 + 0.5) / n as f64).cos()))
            .collect();
        let mut coeffs = Vec::with_capacity(n);
        for j in 0..n {
            let mut s = CompensatedSum::new();
            for (k, v) in vals.iter().enumerate() {
                s.add(v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos());
            }
            let mut cj = 2.0 * s.value() / n as f64;
            if j == 0 {
                cj *= 0.5;
            }
            coeffs.push(cj);
        }
        Self { a, b, coeffs }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn local(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.local(x))
    }

    fn derivative_coeffs(c: &[f64]) -> Vec<f64> {
        let n = c.len();
        if n <= 1 {
            return vec![0.0];
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        d
    }

    /// Derivative of the given order at `x`, with an error estimate that
    /// combines truncation (comparison with a shorter expansion) and roundoff.
    pub fn derivative(&self, x: f64, order: usize) -> (f64, f64) {
        let t = self.local(x);
        let scale = (2.0 / (self.b - self.a)).powi(order as i32);
        let full = Self::nth_coeffs(&self.coeffs, order);
        let short_len = (self.coeffs.len() * 3 / 4).max(order + 1);
        let short = Self::nth_coeffs(&self.coeffs[..short_len.min(self.coeffs.len())], order);
        let v = clenshaw(&full, t) * scale;
        let vs = clenshaw(&short, t) * scale;
        // coefficient noise of size eps max|c| pushed through each basis derivative at x
        let cmax = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut amp2 = 0.0;
        let mut unit = vec![0.0; self.coeffs.len()];
        for k in 0..self.coeffs.len() {
            unit[k] = 1.0;
            let dk = clenshaw(&Self::nth_coeffs(&unit, order), t);
            amp2 += dk * dk;
            unit[k] = 0.0;
        }
        let roundoff = 4.0 * f64::EPSILON * cmax * amp2.sqrt() * scale;
        (v, (v - vs).abs() + roundoff)
    }

    fn nth_coeffs(c: &[f64], order: usize) -> Vec<f64> {
        let mut d = c.to_vec();
        for _ in 0..order {
            d = Self::derivative_coeffs(&d);
        }
        d
    }
}

fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + t * b1 - b2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let rule = GaussLegendre::new(10);
        for k in 0..20 {
            let got = rule.integrate(-1.0, 1.0, |x| x.powi(k));
            let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((got - want).abs() < 1e-14, "k={k} got={got}");
        }
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        // int_0^10 e^{i 50 x} dx
        let r = adaptive_complex(|x| Complex64::new(0.0, 50.0 * x).exp(), &[0.0, 10.0], AdaptiveOptions::default()).unwrap();
        let want = (Complex64::new(0.0, 500.0).exp() - 1.0) / Complex64::new(0.0, 50.0);
        assert!((r.value - want).norm() < 1e-12);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = adaptive_real(|x| x.sqrt().recip(), &[0.0, 1.0], AdaptiveOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_panels: 5000 }).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn chebyshev_derivatives_of_exponential() {
        let c = Chebyshev::fit(|x| (2.0 * x).exp(), -0.5, 0.5, 24);
        for d in 0..8 {
            let (v, err) = c.derivative(0.1, d);
            let want = 2f64.powi(d as i32) * 0.2f64.exp();
            assert!((v - want).abs() < 1e-5 * want, "d={d} v={v} want={want}");
            assert!(err >= (v - want).abs() && err < 1e-4 * want, "d={d} err={err}");
        }
    }
}
