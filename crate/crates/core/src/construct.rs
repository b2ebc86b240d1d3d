//! Eigenfunctions concentrated on tubes near the sphere |x| = λ, built from
//! coherent sums of product Hermite functions, and the saturation ratios of
//! their local norms against the local bounds.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{classify_region, lambda_lp, max_shell, BoundQuery, BoundValue, Exponent, Region as Annulus};
use crate::error::{Error, Result};
use crate::hermite::{action_s, turning_point, Branch};
use crate::normquad::{global_l2_norm, local_lp_norm, LocalNorm, Quadrature, Region};
use crate::spectral::{EigenSpace, Eigenfunction, MultiIndex};

/// c₁ = c₂ in the tube |x₁ - x₁*| <= c₁ λ 2^{-j} δ², |x'| <= c₂ δ.
pub const TUBE_CONSTANT: f64 = 0.125;
/// α_k ∈ [δ^{-2}/c, c δ^{-2}] for k >= 2.
pub const DEFAULT_WINDOW: f64 = 2.0;
pub const DEFAULT_BINS: usize = 8;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TubeSpec {
    pub n: usize,
    pub big_n: u64,
    pub lambda: f64,
    pub j: u32,
    pub delta: f64,
    /// λ - λ 4^{-j}
    pub x1_star: f64,
    pub c1: f64,
    pub c2: f64,
}

impl TubeSpec {
    pub fn new(n: usize, big_n: u64, j: u32, delta: f64) -> Result<Self> {
        let space = EigenSpace::new(n, big_n)?;
        let lambda = space.lambda();
        let x1_star = lambda - lambda * 4f64.powi(-(j as i32));
        let t = Self { n, big_n, lambda, j, delta, x1_star, c1: TUBE_CONSTANT, c2: TUBE_CONSTANT };
        t.validate()?;
        Ok(t)
    }

    pub fn half_length(&self) -> f64 {
        self.c1 * self.lambda * 2f64.powi(-(self.j as i32)) * self.delta * self.delta
    }

    pub fn half_width(&self) -> f64 {
        self.c2 * self.delta
    }

    pub fn center(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n];
        c[0] = self.x1_star;
        c
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let w2: f64 = x[1..].iter().map(|v| v * v).sum();
        (x[0] - self.x1_star).abs() <= self.half_length() && w2 <= self.half_width().powi(2)
    }

    /// λ^{-1/2} 2^{j/2} δ^{-(n-1)/2}
    pub fn target_amplitude(&self) -> f64 {
        self.lambda.powf(-0.5) * 2f64.powf(self.j as f64 / 2.0) * self.delta.powf(-(self.n as f64 - 1.0) / 2.0)
    }

    fn validate(&self) -> Result<()> {
        if self.j > max_shell(self.lambda) {
            return Err(Error::Infeasible(format!("2^j = 2^{} exceeds λ^(2/3) at λ = {:.3}", self.j, self.lambda)));
        }
        let lo = 2f64.powi(self.j as i32) / self.lambda;
        let hi = 2f64.powf(-(self.j as f64) / 2.0);
        if !(self.delta > lo && self.delta <= hi) {
            return Err(Error::Infeasible(format!(
                "δ = {} must lie in (λ^-1 2^j, 2^(-j/2)] = ({lo:.4}, {hi:.4}]",
                self.delta
            )));
        }
        let hl = self.half_length();
        let hw = if self.n > 1 { self.half_width() } else { 0.0 };
        for x1 in [self.x1_star - hl, self.x1_star + hl] {
            let mut x = vec![0.0; self.n];
            x[0] = x1;
            if self.n > 1 {
                x[1] = hw;
            }
            if classify_region(self.lambda, &x) != Annulus::Interior(self.j) {
                return Err(Error::Infeasible(format!("tube leaves the annulus j = {} at x₁ = {x1:.4}", self.j)));
            }
        }
        Ok(())
    }
}

/// Multi-indices with |α| = N and α_k even in [δ^{-2}/c, c δ^{-2}] for k >= 2.
pub fn index_set(n: usize, big_n: u64, delta: f64, c_window: f64) -> Result<Vec<MultiIndex>> {
    if n == 0 || !(delta > 0.0) || !(c_window >= 1.0) {
        return Err(Error::Domain("index set needs n >= 1, δ > 0 and a window constant >= 1".into()));
    }
    if n == 1 {
        return Ok(vec![MultiIndex(vec![big_n as u32])]);
    }
    let center = delta.powi(-2);
    let lo = (center / c_window).ceil() as u64;
    let hi = (center * c_window).floor() as u64;
    let choices: Vec<u64> = (lo..=hi).filter(|v| v % 2 == 0).collect();
    let mut out = Vec::new();
    if !choices.is_empty() {
        let mut pick = vec![0usize; n - 1];
        'outer: loop {
            let used: u64 = pick.iter().map(|&i| choices[i]).sum();
            if used <= big_n {
                let mut a = Vec::with_capacity(n);
                a.push((big_n - used) as u32);
                a.extend(pick.iter().map(|&i| choices[i] as u32));
                out.push(MultiIndex(a));
            }
            for slot in (0..n - 1).rev() {
                pick[slot] += 1;
                if pick[slot] < choices.len() {
                    continue 'outer;
                }
                pick[slot] = 0;
            }
            break;
        }
    }
    if out.is_empty() {
        return Err(Error::Infeasible(format!(
            "no even α_k in [{lo}, {hi}] fit inside |α| = {big_n} for δ = {delta}"
        )));
    }
    Ok(out)
}

/// s_u^-(x₁) mod 2π with u = sqrt(2α₁+1).
pub fn first_axis_phase(alpha1: u32, x1: f64) -> f64 {
    let u = turning_point(alpha1 as usize);
    action_s(u, x1, Branch::Minus).expect("u > 0").rem_euclid(2.0 * PI)
}

#[derive(Debug, Clone, Serialize)]
pub struct BinSelection {
    pub selected: Vec<MultiIndex>,
    pub bin_index: usize,
    /// Bin populations over the parity class that was kept.
    pub counts: Vec<usize>,
    pub parity: u32,
    pub parity_class_size: usize,
}

/// Keeps the α₁ parity class with more members, bins it by s_u^-(x₁*) mod 2π
/// into `m_bins` arcs and returns the fullest bin.
pub fn phase_bin(set: &[MultiIndex], x1_star: f64, m_bins: usize) -> Result<BinSelection> {
    if m_bins == 0 {
        return Err(Error::Domain("need at least one phase bin".into()));
    }
    if set.is_empty() {
        return Err(Error::Infeasible("empty index set".into()));
    }
    let even = set.iter().filter(|a| a.0[0] % 2 == 0).count();
    let parity = if even * 2 >= set.len() { 0 } else { 1 };
    let class: Vec<&MultiIndex> = set.iter().filter(|a| a.0[0] % 2 == parity).collect();
    let width = 2.0 * PI / m_bins as f64;
    let bins: Vec<usize> =
        class.iter().map(|a| ((first_axis_phase(a.0[0], x1_star) / width) as usize).min(m_bins - 1)).collect();
    let mut counts = vec![0usize; m_bins];
    for &b in &bins {
        counts[b] += 1;
    }
    let bin_index = (0..m_bins).max_by_key(|&b| (counts[b], std::cmp::Reverse(b))).unwrap_or(0);
    let selected = class.iter().zip(&bins).filter(|(_, &b)| b == bin_index).map(|(a, _)| (*a).clone()).collect();
    Ok(BinSelection { selected, bin_index, counts, parity, parity_class_size: class.len() })
}

/// Length of the shortest arc containing all the given angles.
pub fn circular_spread(angles: &[f64]) -> f64 {
    if angles.len() < 2 {
        return 0.0;
    }
    let mut a: Vec<f64> = angles.iter().map(|x| x.rem_euclid(2.0 * PI)).collect();
    a.sort_by(f64::total_cmp);
    let mut gap = a[0] + 2.0 * PI - a[a.len() - 1];
    for w in a.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    2.0 * PI - gap
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructionReport {
    #[serde(skip)]
    pub eigenfunction: Eigenfunction,
    pub tube: TubeSpec,
    pub index_set_size: usize,
    pub parity_class_size: usize,
    pub selected: usize,
    pub bin_index: usize,
    /// |J| over the parity class that was binned.
    pub bin_fraction: f64,
    pub target_amplitude: f64,
    pub measured_median_amplitude: f64,
    /// Largest arc spanned by s_u^-(x₁) over J, maximized over tube points.
    pub coherence_spread: f64,
}

/// Points of a tube grid: `along` samples in x₁ times `across` per
/// transverse axis, restricted to |x'| <= c₂ δ.
pub fn tube_grid(t: &TubeSpec, along: usize, across: usize) -> Vec<Vec<f64>> {
    let hl = t.half_length();
    let hw = t.half_width();
    let lin = |m: usize, h: f64| -> Vec<f64> {
        if m <= 1 {
            return vec![0.0];
        }
        (0..m).map(|i| -h + 2.0 * h * i as f64 / (m - 1) as f64).collect()
    };
    let xs = lin(along, hl);
    let ws = lin(across, hw);
    let per_slice = ws.len().pow((t.n - 1) as u32);
    let mut out = Vec::new();
    for &x1 in &xs {
        for mut code in 0..per_slice {
            let mut p = vec![t.x1_star + x1];
            for _ in 1..t.n {
                p.push(ws[code % ws.len()]);
                code /= ws.len();
            }
            if t.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Unit-coefficient eigenfunction on the fullest phase bin for the tube.
pub fn build_concentrated(tube: &TubeSpec, c_window: f64, m_bins: usize) -> Result<ConstructionReport> {
    let set = index_set(tube.n, tube.big_n, tube.delta, c_window)?;
    let bins = phase_bin(&set, tube.x1_star, m_bins)?;
    let space = EigenSpace::new(tube.n, tube.big_n)?;
    let coeffs: BTreeMap<MultiIndex, f64> = bins.selected.iter().map(|a| (a.clone(), 1.0)).collect();
    let e = Eigenfunction::new(space, coeffs)?;
    let norm = global_l2_norm(&e);

    let grid = tube_grid(tube, 33, 5);
    let mut amps: Vec<f64> = grid.par_iter().map(|x| e.eval(x).map(|v| v.abs() / norm)).collect::<Result<_>>()?;
    let measured = median(&mut amps);

    let spread = grid
        .iter()
        .filter(|x| x[1..].iter().all(|&v| v == 0.0))
        .map(|x| {
            let a: Vec<f64> = bins.selected.iter().map(|a| first_axis_phase(a.0[0], x[0])).collect();
            circular_spread(&a)
        })
        .fold(0.0f64, f64::max);

    Ok(ConstructionReport {
        eigenfunction: e,
        tube: *tube,
        index_set_size: set.len(),
        parity_class_size: bins.parity_class_size,
        selected: bins.selected.len(),
        bin_index: bins.bin_index,
        bin_fraction: bins.selected.len() as f64 / bins.parity_class_size as f64,
        target_amplitude: tube.target_amplitude(),
        measured_median_amplitude: measured,
        coherence_spread: spread,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Saturation {
    /// ||e||_{L^p(B(ν,r))} / ||e||_{L²(R^n)}
    pub measured: f64,
    pub local: LocalNorm,
    pub bound: BoundValue,
    pub ratio: f64,
}

/// Monte Carlo sample count used in dimensions n >= 3.
pub const MONTE_CARLO_SAMPLES: usize = 200_000;

/// Measured local norm on B(ν, r) over the global L² norm, divided by Λ.
///
/// Tensor grids at the resolution guard for n <= 2, seeded Monte Carlo above.
pub fn measure_ratio(e: &Eigenfunction, nu: &[f64], r: f64, p: Exponent, feature: Option<f64>, seed: u64) -> Result<Saturation> {
    let space = e.space();
    let lambda = space.lambda();
    let nu_abs = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
    let bound = lambda_lp(&BoundQuery { n: space.n, lambda, r, nu: nu_abs, p })?;
    let mut reg = Region::ball(nu.to_vec(), r);
    reg.feature_scale = feature;
    let reg = if space.n <= 2 {
        reg.resolved_for(lambda, 1.0)
    } else {
        Region { quad: Quadrature::MonteCarlo { samples: MONTE_CARLO_SAMPLES, seed }, ..reg }
    };
    let local = local_lp_norm(e, &reg, p)?;
    let measured = local.value / global_l2_norm(e);
    Ok(Saturation { measured, local, bound, ratio: measured / bound.value })
}

/// [`measure_ratio`] for a constructed eigenfunction, resolving the tube width.
pub fn saturation_ratio(report: &ConstructionReport, nu: &[f64], r: f64, p: Exponent) -> Result<Saturation> {
    measure_ratio(&report.eigenfunction, nu, r, p, Some(report.tube.delta), 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_set_examples() {
        let one = index_set(1, 40, 0.3, 2.0).unwrap();
        assert_eq!(one, vec![MultiIndex(vec![40])]);
        let two = index_set(2, 100, 1.0 / 3.0, 2.0).unwrap();
        let a2: Vec<u32> = two.iter().map(|a| a.0[1]).collect();
        assert_eq!(a2, vec![6, 8, 10, 12, 14, 16, 18]);
        assert!(two.iter().all(|a| a.order() == 100));
        let big = index_set(2, 800, 0.1, 2.0).unwrap().len() as f64;
        assert!((25.0..=400.0).contains(&big));
        assert!(index_set(2, 4, 0.1, 2.0).is_err());
    }

    #[test]
    fn pigeonhole_and_coherence() {
        let t = TubeSpec::new(2, 800, 1, 0.1).unwrap();
        let set = index_set(2, 800, 0.1, 2.0).unwrap();
        let b = phase_bin(&set, t.x1_star, 8).unwrap();
        assert_eq!(b.counts.iter().sum::<usize>(), b.parity_class_size);
        assert!(b.selected.len() * 8 >= b.parity_class_size);
        let a: Vec<f64> = b.selected.iter().map(|a| first_axis_phase(a.0[0], t.x1_star)).collect();
        assert!(circular_spread(&a) <= 2.0 * PI / 8.0 + 1e-12);
    }

    #[test]
    fn one_dimensional_tube_amplitude() {
        let t = TubeSpec::new(1, 2000, 2, 0.4).unwrap();
        let rep = build_concentrated(&t, DEFAULT_WINDOW, DEFAULT_BINS).unwrap();
        assert_eq!(rep.selected, 1);
        let q = rep.measured_median_amplitude / rep.target_amplitude;
        assert!((0.1..10.0).contains(&q), "{q}");
    }

    #[test]
    fn spread_wraps_around() {
        assert!((circular_spread(&[0.1, 2.0 * PI - 0.1]) - 0.2).abs() < 1e-12);
        assert_eq!(circular_spread(&[1.0]), 0.0);
    }

    #[test]
    fn rejects_bad_tubes() {
        assert!(TubeSpec::new(2, 200, 0, 1e-3).is_err());
        assert!(TubeSpec::new(2, 200, 9, 0.01).is_err());
    }
}
