//! Local L^p norms of eigenfunctions on balls and boxes.
//!
//! Tensor grids are composite Gauss–Legendre on the bounding box, with an
//! indicator for balls. Eigenfunctions are sums of products, so values on a
//! tensor grid come from per-axis Hermite tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::Exponent;
use crate::error::{Error, Result};
use crate::hermite::hermite_batch_into;
use crate::quad::{composite_nodes, GaussLegendre};
use crate::spectral::Eigenfunction;
use crate::sum::CompensatedSum;

/// Nodes per Gauss–Legendre panel on tensor grids.
pub const PANEL_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// |x - ν| < r
    Ball,
    /// max_k |x_k - ν_k| <= r
    Box,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    TensorGrid { points_per_axis: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub shape: Shape,
    pub center: Vec<f64>,
    pub scale: f64,
    pub quad: Quadrature,
    /// Smallest spatial feature besides the wavelength, e.g. a tube width.
    #[serde(default)]
    pub feature_scale: Option<f64>,
}

impl Region {
    pub fn new(shape: Shape, center: Vec<f64>, scale: f64, quad: Quadrature) -> Self {
        Self { shape, center, scale, quad, feature_scale: None }
    }

    pub fn ball(center: Vec<f64>, r: f64) -> Self {
        Self::new(Shape::Ball, center, r, Quadrature::TensorGrid { points_per_axis: PANEL_ORDER })
    }

    pub fn cube(center: Vec<f64>, half_side: f64) -> Self {
        Self::new(Shape::Box, center, half_side, Quadrature::TensorGrid { points_per_axis: PANEL_ORDER })
    }

    pub fn with_feature_scale(mut self, s: f64) -> Self {
        self.feature_scale = Some(s);
        self
    }

    /// Node spacing required at energy λ: min(1/λ, feature scale)/4.
    pub fn required_spacing(&self, lambda: f64) -> f64 {
        let base = 1.0 / lambda.max(f64::MIN_POSITIVE);
        self.feature_scale.map_or(base, |s| base.min(s)) / 4.0
    }

    /// Mean node spacing of the tensor grid, None for Monte Carlo.
    pub fn spacing(&self) -> Option<f64> {
        match self.quad {
            Quadrature::TensorGrid { points_per_axis } => Some(2.0 * self.scale / points_per_axis.max(1) as f64),
            Quadrature::MonteCarlo { .. } => None,
        }
    }

    /// Switches to the coarsest tensor grid that passes the resolution guard,
    /// refined by `factor`.
    pub fn resolved_for(mut self, lambda: f64, factor: f64) -> Self {
        let need = 2.0 * self.scale / self.required_spacing(lambda) * factor.max(1.0);
        let panels = (need / PANEL_ORDER as f64).ceil().max(1.0) as usize;
        self.quad = Quadrature::TensorGrid { points_per_axis: panels * PANEL_ORDER };
        self
    }

    fn volume_box(&self) -> f64 {
        (2.0 * self.scale).powi(self.center.len() as i32)
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.center.len() != n {
            return Err(Error::Domain(format!("region center has dimension {}, expected {n}", self.center.len())));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::Domain(format!("region scale {} must be positive", self.scale)));
        }
        match self.quad {
            Quadrature::TensorGrid { points_per_axis: 0 } | Quadrature::MonteCarlo { samples: 0, .. } => {
                Err(Error::Domain("quadrature needs at least one node".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocalNorm {
    pub value: f64,
    /// Grid refinement difference, or Monte Carlo standard error.
    pub error: Option<f64>,
    pub nodes: usize,
}

/// ||e||_{L^p(region)}.
pub fn local_lp_norm(e: &Eigenfunction, reg: &Region, p: Exponent) -> Result<LocalNorm> {
    let n = e.space().n;
    reg.validate(n)?;
    match reg.quad {
        Quadrature::TensorGrid { points_per_axis } => {
            let required = reg.required_spacing(e.space().lambda());
            let spacing = reg.spacing().unwrap_or(0.0);
            if spacing > required * (1.0 + 1e-12) {
                return Err(Error::Resolution { spacing, required });
            }
            let (value, nodes) = tensor_norm(e, reg, points_per_axis, p);
            Ok(LocalNorm { value, error: None, nodes })
        }
        Quadrature::MonteCarlo { samples, seed } => monte_carlo_norm(e, reg, samples, seed, p),
    }
}

/// Tensor-grid norm at the given resolution and at twice that resolution;
/// returns the finer value with their difference as error.
pub fn local_lp_norm_refined(e: &Eigenfunction, reg: &Region, p: Exponent) -> Result<LocalNorm> {
    let coarse = local_lp_norm(e, reg, p)?;
    let Quadrature::TensorGrid { points_per_axis } = reg.quad else {
        return Ok(coarse);
    };
    let mut fine = reg.clone();
    fine.quad = Quadrature::TensorGrid { points_per_axis: 2 * points_per_axis };
    let f = local_lp_norm(e, &fine, p)?;
    Ok(LocalNorm { value: f.value, error: Some((f.value - coarse.value).abs()), nodes: f.nodes })
}

/// sqrt(sum c_α²), exact by orthonormality.
pub fn global_l2_norm(e: &Eigenfunction) -> f64 {
    e.global_l2_norm()
}

struct AxisTables {
    nodes: Vec<(f64, f64)>,
    /// node-major: values[i * terms + t]
    values: Vec<f64>,
}

fn axis_tables(e: &Eigenfunction, axis: usize, lo: f64, hi: f64, points: usize) -> AxisTables {
    let rule = GaussLegendre::new(PANEL_ORDER.min(points));
    let panels = points.div_ceil(rule.len());
    let nodes = composite_nodes(lo, hi, panels, &rule);
    let orders: Vec<usize> = e.coefficients().keys().map(|a| a.0[axis] as usize).collect();
    let kmax = orders.iter().copied().max().unwrap_or(0);
    let terms = orders.len();
    let mut values = vec![0.0; nodes.len() * terms];
    values.par_chunks_mut(terms.max(1)).zip(nodes.par_iter()).for_each_init(
        || vec![0.0; kmax + 1],
        |buf, (row, &(x, _))| {
            hermite_batch_into(x, buf);
            for (v, &k) in row.iter_mut().zip(&orders) {
                *v = buf[k];
            }
        },
    );
    AxisTables { nodes, values }
}

fn tensor_norm(e: &Eigenfunction, reg: &Region, points: usize, p: Exponent) -> (f64, usize) {
    let n = e.space().n;
    let r = reg.scale;
    let tables: Vec<AxisTables> =
        (0..n).map(|d| axis_tables(e, d, reg.center[d] - r, reg.center[d] + r, points)).collect();
    let coeffs: Vec<f64> = e.coefficients().values().copied().collect();
    let terms = coeffs.len();
    let m0 = tables[0].nodes.len();
    let total = tables.iter().map(|t| t.nodes.len()).product();

    let ctx = Ctx { tables: &tables, center: &reg.center, r2: r * r, ball: reg.shape == Shape::Ball, p, terms };
    let rows: Vec<(f64, f64)> = (0..m0)
        .into_par_iter()
        .map(|i0| {
            let (x0, w0) = tables[0].nodes[i0];
            let d0 = x0 - reg.center[0];
            let mut weights = vec![0.0; terms];
            for (t, w) in weights.iter_mut().enumerate() {
                *w = coeffs[t] * tables[0].values[i0 * terms + t];
            }
            let mut acc = Acc::default();
            ctx.walk(1, &weights, w0, d0 * d0, &mut acc);
            (acc.sum.value(), acc.max)
        })
        .collect();

    let value = if p.is_infinite() {
        rows.iter().fold(0.0f64, |m, &(_, v)| m.max(v))
    } else {
        let s: f64 = rows.iter().map(|&(v, _)| v).collect::<CompensatedSum>().value();
        s.max(0.0).powf(p.inv())
    };
    (value, total)
}

#[derive(Default)]
struct Acc {
    sum: CompensatedSum,
    max: f64,
}

struct Ctx<'a> {
    tables: &'a [AxisTables],
    center: &'a [f64],
    r2: f64,
    ball: bool,
    p: Exponent,
    terms: usize,
}

impl Ctx<'_> {
    fn walk(&self, axis: usize, partial: &[f64], weight: f64, rad2: f64, acc: &mut Acc) {
        if self.ball && rad2 >= self.r2 {
            return;
        }
        if axis == self.tables.len() {
            let v: f64 = partial.iter().sum::<f64>().abs();
            if self.p.is_infinite() {
                acc.max = acc.max.max(v);
            } else {
                acc.sum.add(weight * v.powf(1.0 / self.p.inv()));
            }
            return;
        }
        let tab = &self.tables[axis];
        let last = axis + 1 == self.tables.len();
        let mut next = vec![0.0; if last { 0 } else { self.terms }];
        for (i, &(x, w)) in tab.nodes.iter().enumerate() {
            let d = x - self.center[axis];
            let rr = rad2 + d * d;
            if self.ball && rr >= self.r2 {
                continue;
            }
            let row = &tab.values[i * self.terms..(i + 1) * self.terms];
            if last {
                let v = partial.iter().zip(row).map(|(a, b)| a * b).sum::<f64>().abs();
                if self.p.is_infinite() {
                    acc.max = acc.max.max(v);
                } else {
                    acc.sum.add(weight * w * pow_abs(v, self.p));
                }
            } else {
                for ((o, a), b) in next.iter_mut().zip(partial).zip(row) {
                    *o = a * b;
                }
                self.walk(axis + 1, &next, weight * w, rr, acc);
            }
        }
    }
}

fn pow_abs(v: f64, p: Exponent) -> f64 {
    let ip = p.inv();
    if ip == 0.5 {
        v * v
    } else {
        v.powf(1.0 / ip)
    }
}

fn monte_carlo_norm(e: &Eigenfunction, reg: &Region, samples: usize, seed: u64, p: Exponent) -> Result<LocalNorm> {
    let n = e.space().n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..samples)
        .map(|_| reg.center.iter().map(|c| c + reg.scale * rng.random_range(-1.0..1.0)).collect())
        .collect();
    let vals: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let inside = reg.shape == Shape::Box || crate::phase::dist2(x, &reg.center) < reg.scale * reg.scale;
            if inside {
                e.eval(x).map(f64::abs)
            } else {
                Ok(-1.0)
            }
        })
        .collect::<Result<_>>()?;
    debug_assert_eq!(points.first().map_or(n, Vec::len), n);
    if p.is_infinite() {
        let m = vals.iter().fold(0.0f64, |m, &v| m.max(v));
        return Ok(LocalNorm { value: m, error: None, nodes: samples });
    }
    let f: Vec<f64> = vals.iter().map(|&v| if v < 0.0 { 0.0 } else { pow_abs(v, p) }).collect();
    let mean = f.iter().copied().collect::<CompensatedSum>().value() / samples as f64;
    let var = f.iter().map(|v| (v - mean).powi(2)).collect::<CompensatedSum>().value() / (samples.max(2) - 1) as f64;
    let vol = reg.volume_box();
    let integral = vol * mean;
    let value = integral.max(0.0).powf(p.inv());
    let se = vol * (var / samples as f64).sqrt();
    // d(I^{1/p}) = (1/p) I^{1/p - 1} dI
    let error = if integral > 0.0 { p.inv() * value / integral * se } else { se.powf(p.inv()) };
    Ok(LocalNorm { value, error: Some(error), nodes: samples })
}

/// ∫_a^b h_k h_l for all k, l <= kmax on one interval.
///
/// The off-diagonal entries come from the Wronskian identity
/// (h_k' h_l - h_k h_l')' = 2(l - k) h_k h_l; the diagonal is integrated
/// by composite Gauss–Legendre.
pub struct IntervalGram {
    ha: Vec<f64>,
    hb: Vec<f64>,
    da: Vec<f64>,
    db: Vec<f64>,
    diag: Vec<f64>,
}

fn values_and_derivatives(kmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut h = vec![0.0; kmax + 2];
    hermite_batch_into(x, &mut h);
    let d = (0..=kmax)
        .map(|k| {
            let kf = k as f64;
            let lower = if k == 0 { 0.0 } else { (kf / 2.0).sqrt() * h[k - 1] };
            lower - ((kf + 1.0) / 2.0).sqrt() * h[k + 1]
        })
        .collect();
    h.truncate(kmax + 1);
    (h, d)
}

impl IntervalGram {
    pub fn new(kmax: usize, a: f64, b: f64) -> Self {
        let (ha, da) = values_and_derivatives(kmax, a);
        let (hb, db) = values_and_derivatives(kmax, b);
        let u = (2.0 * kmax as f64 + 1.0).sqrt();
        let panels = (((b - a) * (u + 1.0)).ceil() as usize).max(1);
        let rule = GaussLegendre::new(16);
        let nodes = composite_nodes(a, b, panels, &rule);
        let parts: Vec<Vec<f64>> = nodes
            .par_chunks(64)
            .map(|chunk| {
                let mut buf = vec![0.0; kmax + 1];
                let mut acc = vec![0.0; kmax + 1];
                for &(x, w) in chunk {
                    hermite_batch_into(x, &mut buf);
                    for (s, h) in acc.iter_mut().zip(&buf) {
                        *s += w * h * h;
                    }
                }
                acc
            })
            .collect();
        let diag = (0..=kmax).map(|k| parts.iter().map(|p| p[k]).collect::<CompensatedSum>().value()).collect();
        Self { ha, hb, da, db, diag }
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        if k == l {
            return self.diag[k];
        }
        let w = |h: &[f64], d: &[f64]| d[k] * h[l] - h[k] * d[l];
        (w(&self.hb, &self.db) - w(&self.ha, &self.da)) / (2.0 * (l as f64 - k as f64))
    }
}

/// One-dimensional Gram data for a box, reusable across eigenfunctions
/// whose orders stay below the construction limits.
pub struct BoxGram {
    center: Vec<f64>,
    kmax: Vec<usize>,
    axes: Vec<IntervalGram>,
}

impl BoxGram {
    /// The box prod_k [center_k - half, center_k + half], orders up to kmax[k].
    pub fn new(kmax: &[usize], center: &[f64], half: f64) -> Result<Self> {
        if kmax.len() != center.len() || !(half > 0.0) {
            return Err(Error::Domain("box needs matching dimensions and a positive half side".into()));
        }
        let axes = kmax.iter().zip(center).map(|(&k, &c)| IntervalGram::new(k, c - half, c + half)).collect();
        Ok(Self { center: center.to_vec(), kmax: kmax.to_vec(), axes })
    }

    /// ||e||²_{L²(box)}, summed over coefficient pairs with compensated rows.
    pub fn norm_sq(&self, e: &Eigenfunction) -> Result<f64> {
        let n = e.space().n;
        if n != self.center.len() {
            return Err(Error::Domain("box dimension does not match the eigenfunction".into()));
        }
        if e.max_orders().iter().zip(&self.kmax).any(|(a, b)| a > b) {
            return Err(Error::Domain("eigenfunction orders exceed the tabulated Gram range".into()));
        }
        let terms: Vec<(&[u32], f64)> = e.coefficients().iter().map(|(a, &c)| (a.0.as_slice(), c)).collect();
        let rows: Vec<f64> = terms
            .par_iter()
            .map(|&(a, ca)| {
                let mut s = CompensatedSum::new();
                for &(b, cb) in &terms {
                    let mut g = ca * cb;
                    for (d, gram) in self.axes.iter().enumerate() {
                        g *= gram.get(a[d] as usize, b[d] as usize);
                    }
                    s.add(g);
                }
                s.value()
            })
            .collect();
        Ok(rows.into_iter().collect::<CompensatedSum>().value())
    }
}

/// ||e||²_{L²(box)} for the box prod_k [center_k - half, center_k + half].
pub fn box_l2_gram(e: &Eigenfunction, center: &[f64], half: f64) -> Result<f64> {
    BoxGram::new(&e.max_orders(), center, half)?.norm_sq(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{EigenSpace, MultiIndex};

    fn erf(x: f64) -> f64 {
        // Maclaurin series, fine for |x| <= 2
        let mut term = x;
        let mut s = x;
        for k in 1..80 {
            term *= -x * x / k as f64;
            s += term / (2 * k + 1) as f64;
        }
        s * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn ground_state_on_unit_interval() {
        let e = Eigenfunction::basis(EigenSpace::new(1, 0).unwrap(), MultiIndex(vec![0])).unwrap();
        let reg = Region::cube(vec![0.0], 1.0).resolved_for(1.0, 4.0);
        let v = local_lp_norm(&e, &reg, Exponent::TWO).unwrap();
        assert!((v.value - erf(1.0).sqrt()).abs() < 1e-13, "{} {}", v.value, erf(1.0).sqrt());
    }

    #[test]
    fn infinity_on_single_node() {
        let e = Eigenfunction::basis(EigenSpace::new(1, 3).unwrap(), MultiIndex(vec![3])).unwrap();
        let reg = Region::new(Shape::Box, vec![0.4], 1e-4, Quadrature::TensorGrid { points_per_axis: 1 });
        let v = local_lp_norm(&e, &reg, Exponent::INFINITY).unwrap();
        assert!((v.value - crate::hermite::hermite_normalized(3, 0.4).abs()).abs() < 1e-12);
    }

    #[test]
    fn resolution_guard() {
        let e = Eigenfunction::basis(EigenSpace::new(1, 50).unwrap(), MultiIndex(vec![50])).unwrap();
        let reg = Region::new(Shape::Ball, vec![0.0], 3.0, Quadrature::TensorGrid { points_per_axis: 16 });
        assert!(matches!(local_lp_norm(&e, &reg, Exponent::TWO), Err(Error::Resolution { .. })));
    }

    #[test]
    fn gram_matches_tensor_grid() {
        let space = EigenSpace::new(2, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = Eigenfunction::random(space, &mut rng).unwrap();
        let g = box_l2_gram(&e, &[0.3, -0.2], 1.1).unwrap();
        let reg = Region::cube(vec![0.3, -0.2], 1.1).resolved_for(space.lambda(), 1.0);
        let q = local_lp_norm(&e, &reg, Exponent::TWO).unwrap().value;
        assert!((g.sqrt() - q).abs() < 1e-10 * q, "{} {}", g.sqrt(), q);
    }

    #[test]
    fn whole_space_recovers_global_norm() {
        let space = EigenSpace::new(2, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = Eigenfunction::random(space, &mut rng).unwrap();
        let reg = Region::cube(vec![0.0, 0.0], 12.0).resolved_for(space.lambda(), 1.0);
        let q = local_lp_norm(&e, &reg, Exponent::TWO).unwrap().value;
        assert!((q / global_l2_norm(&e) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let e = Eigenfunction::basis(EigenSpace::new(3, 4).unwrap(), MultiIndex(vec![2, 2, 0])).unwrap();
        let reg = Region::new(Shape::Ball, vec![0.0; 3], 2.0, Quadrature::MonteCarlo { samples: 20_000, seed: 5 });
        let a = local_lp_norm(&e, &reg, Exponent::TWO).unwrap();
        let b = local_lp_norm(&e, &reg, Exponent::TWO).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let grid = Region { quad: Quadrature::TensorGrid { points_per_axis: 96 }, ..reg };
        let t = local_lp_norm(&e, &grid, Exponent::TWO).unwrap();
        assert!((a.value - t.value).abs() < 5.0 * a.error.unwrap(), "{} {} {:?}", a.value, t.value, a.error);
    }
}
