//! Local L^p bounds for Hermite eigenfunctions on balls B(ν, r), the global
//! exponents σ(p) and ρ(p), and the annular bounds on the dyadic regions
//! relative to the sphere |x| = λ.
//!
//! Everything is affine in 1/p, so exponents are carried as `ip = 1/p`
//! (0 for p = ∞) and values are evaluated in log space.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exponent p in [1, ∞], stored through 1/p.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent {
    inv: f64,
}

impl Exponent {
    pub const INFINITY: Exponent = Exponent { inv: 0.0 };
    pub const TWO: Exponent = Exponent { inv: 0.5 };

    pub fn finite(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("exponent p = {p} must be at least 1")));
        }
        Ok(Self { inv: if p.is_infinite() { 0.0 } else { 1.0 / p } })
    }

    pub fn from_inverse(inv: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&inv) {
            return Err(Error::Domain(format!("1/p = {inv} outside [0, 1]")));
        }
        Ok(Self { inv })
    }

    pub fn inv(&self) -> f64 {
        self.inv
    }

    pub fn is_infinite(&self) -> bool {
        self.inv == 0.0
    }

    /// p itself, f64::INFINITY for p = ∞.
    pub fn value(&self) -> f64 {
        if self.inv == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.inv
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.value())
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.value())
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::finite(p).map_err(serde::de::Error::custom),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Inf" | "INF") => Ok(Exponent::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

/// Critical exponents in 1/p form for dimension n.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Thresholds {
    /// 1/p at the kink p = (2n+6)/(n+1).
    pub kink: f64,
    /// 1/p at p = (2n+2)/(n-1); 0 when n = 1.
    pub stein_tomas: f64,
    /// 1/p at p = 2n/(n-2); 0 when n <= 2.
    pub critical: f64,
}

pub fn thresholds(n: usize) -> Thresholds {
    let nf = n as f64;
    Thresholds {
        kink: (nf + 1.0) / (2.0 * nf + 6.0),
        stein_tomas: (nf - 1.0) / (2.0 * nf + 2.0),
        critical: if n <= 2 { 0.0 } else { (nf - 2.0) / (2.0 * nf) },
    }
}

/// A ball B(ν, r) with |ν| <= λ and 0 < r <= λ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundQuery {
    pub n: usize,
    pub lambda: f64,
    pub r: f64,
    /// |ν|; the bounds only depend on the distance of ν from the origin.
    pub nu: f64,
    pub p: Exponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundBranch {
    /// r <= (λμ^{1/2})^{-1}
    SmallBall,
    /// (λμ^{1/2})^{-1} < r < λμ, p <= (2n+2)/(n-1)
    MidLowP,
    /// (λμ^{1/2})^{-1} < r < λμ, p > (2n+2)/(n-1)
    MidHighP,
    /// r >= λμ, p <= (2n+6)/(n+1)
    LargeBelowKink,
    /// r >= λμ, (2n+6)/(n+1) < p <= (2n+2)/(n-1)
    LargeKinkToSteinTomas,
    /// r >= λμ, (2n+2)/(n-1) < p <= 2n/(n-2)
    LargeSteinTomasToCritical,
    /// r >= λμ, p > 2n/(n-2)
    LargeAboveCritical,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub log_value: f64,
    pub branch: BoundBranch,
    pub mu: f64,
    pub mu_tilde: f64,
}

/// μ = max(λ^{-4/3}, 1 - |ν|/λ) and μ̃ = max(λ^{-4/3}, μ - r/λ).
pub fn mu_params(lambda: f64, r: f64, nu: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    if !(r > 0.0 && r <= lambda) {
        return Err(Error::Domain(format!("r = {r} must lie in (0, λ]")));
    }
    if !(nu >= 0.0 && nu <= lambda) {
        return Err(Error::Domain(format!("|ν| = {nu} must lie in [0, λ]")));
    }
    let floor = lambda.powf(-4.0 / 3.0);
    let mu = floor.max(1.0 - nu / lambda);
    Ok((mu, floor.max(mu - r / lambda)))
}

fn finish(log_value: f64, branch: BoundBranch, mu: f64, mu_tilde: f64) -> BoundValue {
    BoundValue { value: log_value.exp(), log_value, branch, mu, mu_tilde }
}

/// Λ(λ, r, ν, p), the local L^p bound on B(ν, r) relative to the global L² norm.
pub fn lambda_lp(q: &BoundQuery) -> Result<BoundValue> {
    if q.n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if q.p.inv() > 0.5 {
        return Err(Error::Domain(format!("p = {} must be at least 2", q.p)));
    }
    let (mu, mu_t) = mu_params(q.lambda, q.r, q.nu)?;
    let branch = select_branch(q, mu);
    Ok(finish(branch_log_value(q, branch, mu, mu_t), branch, mu, mu_t))
}

/// The branch of Λ that applies at (λ, r, μ, p).
pub fn select_branch(q: &BoundQuery, mu: f64) -> BoundBranch {
    let ip = q.p.inv();
    let th = thresholds(q.n);
    let (ll, lr, lmu) = (q.lambda.ln(), q.r.ln(), mu.ln());
    if lr <= -(ll + 0.5 * lmu) {
        BoundBranch::SmallBall
    } else if lr < ll + lmu {
        if ip >= th.stein_tomas {
            BoundBranch::MidLowP
        } else {
            BoundBranch::MidHighP
        }
    } else if ip >= th.kink {
        BoundBranch::LargeBelowKink
    } else if ip >= th.stein_tomas {
        BoundBranch::LargeKinkToSteinTomas
    } else if ip >= th.critical {
        BoundBranch::LargeSteinTomasToCritical
    } else {
        BoundBranch::LargeAboveCritical
    }
}

/// log of the formula of one branch, evaluated wherever it is asked.
pub fn branch_log_value(q: &BoundQuery, branch: BoundBranch, mu: f64, mu_tilde: f64) -> f64 {
    let n = q.n as f64;
    let ip = q.p.inv();
    let ll = q.lambda.ln();
    let lr = q.r.ln();
    // log(λ μ^{1/2})
    let lscale = ll + 0.5 * mu.ln();
    let tail = (n + 3.0) * ip / 4.0 - (n + 1.0) / 8.0;
    match branch {
        BoundBranch::SmallBall => 0.5 * (n - 2.0) * lscale + n * ip * lr,
        BoundBranch::MidLowP => ((n - 1.0) / 4.0 - (n + 1.0) * ip / 2.0) * (lscale - lr) + (ip - 0.5) * lscale,
        BoundBranch::MidHighP => ((n - 2.0) / 2.0 - n * ip) * lscale,
        BoundBranch::LargeBelowKink => tail * (lr - ll) + (ip - 0.5) * ll,
        BoundBranch::LargeKinkToSteinTomas => tail * mu_tilde.ln() + (ip - 0.5) * ll,
        BoundBranch::LargeSteinTomasToCritical => ((n - 2.0) / 2.0 - n * ip) * (ll + 0.5 * mu_tilde.ln()),
        BoundBranch::LargeAboveCritical => ((n - 2.0) / 2.0 - n * ip) * 0.5 * (ll + lr),
    }
}

/// Λ(λ, r, ν) at p = 2.
pub fn lambda_l2(n: usize, lambda: f64, r: f64, nu: f64) -> Result<BoundValue> {
    lambda_lp(&BoundQuery { n, lambda, r, nu, p: Exponent::TWO })
}

/// sup over centers ν of Λ(λ, r, ν, p), read off a log grid in μ together with
/// the branch seams μ = (λr)^{-2} and μ = r/λ, where the piecewise power laws
/// change direction.
pub fn sup_over_centers(n: usize, lambda: f64, r: f64, p: Exponent, grid: usize) -> Result<(f64, f64)> {
    let floor = lambda.powf(-4.0 / 3.0);
    let mut mus: Vec<f64> = (0..=grid)
        .map(|k| floor.ln() * (1.0 - k as f64 / grid.max(1) as f64))
        .map(f64::exp)
        .collect();
    mus.extend([(lambda * r).powi(-2), r / lambda, floor, 1.0]);
    let mut best = (f64::NEG_INFINITY, 1.0);
    for mu in mus.into_iter().filter(|m| (floor..=1.0).contains(m)) {
        let nu = (lambda * (1.0 - mu)).clamp(0.0, lambda);
        let v = lambda_lp(&BoundQuery { n, lambda, r, nu, p })?;
        if v.value > best.0 {
            best = (v.value, v.mu);
        }
    }
    Ok(best)
}

/// Sogge's exponent σ(p).
pub fn sogge_sigma(n: usize, p: Exponent) -> f64 {
    let nf = n as f64;
    let ip = p.inv();
    if ip >= thresholds(n).stein_tomas {
        (nf - 1.0) / 2.0 * (0.5 - ip)
    } else {
        (nf - 1.0) / 2.0 - nf * ip
    }
}

/// The global exponent ρ(p) with ||e||_p <= λ^{ρ(p)} ||e||_2.
pub fn kt_rho(n: usize, p: Exponent) -> f64 {
    let nf = n as f64;
    let ip = p.inv();
    let th = thresholds(n);
    if ip >= th.kink {
        -0.5 + ip
    } else if n == 1 {
        -1.0 / 6.0 - ip / 3.0
    } else if ip >= th.critical {
        (nf - 2.0) / 6.0 - nf * ip / 3.0
    } else {
        (nf - 2.0) / 2.0 - nf * ip
    }
}

/// λ^{-1/(n+3)} (log λ)^{(n+1)/(2n+6)}, the global bound at the kink.
pub fn kink_reference(n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    lambda.powf(-1.0 / (nf + 3.0)) * lambda.ln().powf((nf + 1.0) / (2.0 * nf + 6.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// The dyadic annulus λ - |x| ≈ λ 4^{-j}.
    Interior(u32),
    Boundary,
    Exterior,
}

/// Largest j with 2^j <= λ^{2/3}.
pub fn max_shell(lambda: f64) -> u32 {
    if lambda <= 1.0 {
        return 0;
    }
    ((2.0 / 3.0) * lambda.log2()).floor().max(0.0) as u32
}

/// Exterior, boundary layer, or the shell j whose center λ4^{-j} is
/// nearest to λ - |x| on a log scale, clamped to 1 <= 2^j <= λ^{2/3}.
pub fn classify_region(lambda: f64, x: &[f64]) -> Region {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let band = lambda.powf(-1.0 / 3.0);
    if r > lambda + 0.5 * band {
        return Region::Exterior;
    }
    if (r - lambda).abs() <= band {
        return Region::Boundary;
    }
    let depth = lambda - r;
    let j = (lambda / depth).log(4.0).round().max(0.0) as u32;
    Region::Interior(j.min(max_shell(lambda)))
}

/// L^p bound on a dyadic annulus or the boundary/exterior region.
pub fn kt_annulus_bound(n: usize, lambda: f64, region: Region, p: Exponent) -> Result<f64> {
    let nf = n as f64;
    let ip = p.inv();
    match region {
        Region::Interior(j) => {
            if j > max_shell(lambda) {
                return Err(Error::Domain(format!("shell j = {j} exceeds 2^j <= λ^(2/3) at λ = {lambda}")));
            }
            let jf = j as f64;
            let log2 = std::f64::consts::LN_2;
            let lg = if ip >= thresholds(n).stein_tomas {
                (ip - 0.5) * lambda.ln() + jf * log2 * ((nf + 1.0) / 4.0 - (nf + 3.0) * ip / 2.0)
            } else {
                ((nf - 2.0) / 2.0 - nf * ip) * (lambda.ln() - jf * log2)
            };
            Ok(lg.exp())
        }
        Region::Boundary | Region::Exterior => Ok(((-1.0 / 3.0 + nf / 3.0 * (0.5 - ip)) * lambda.ln()).exp()),
    }
}

/// Which column of the maximal bound tables applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TableColumn {
    /// λ^{-1/3} <= r (or λ^{-1} <= r above 2n/(n-2))
    Wide,
    /// λ^{-1} <= r < λ^{-1/3}
    Middle,
    /// r < λ^{-1}
    Tiny,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MaximalBound {
    pub value: f64,
    pub column: TableColumn,
}

/// sup over ν of Λ(λ, r, ν, p) as tabulated for n >= 2.
///
/// Returns None for n = 1 and at the kink exponent itself.
pub fn maximal_local_bound(n: usize, lambda: f64, r: f64, p: Exponent) -> Option<MaximalBound> {
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let ip = p.inv();
    let th = thresholds(n);
    let ll = lambda.ln();
    let lr = r.ln();
    if (ip - th.kink).abs() < 1e-15 {
        return None;
    }
    let tiny = lr < -ll;
    if tiny {
        return Some(MaximalBound { value: (0.5 * (nf - 2.0) * ll + nf * ip * lr).exp(), column: TableColumn::Tiny });
    }
    if n >= 3 && ip < th.critical {
        return Some(MaximalBound { value: (((nf - 2.0) / 2.0 - nf * ip) * ll).exp(), column: TableColumn::Wide });
    }
    if lr < -ll / 3.0 {
        return Some(MaximalBound { value: ((nf * ip - (nf - 2.0) / 2.0) * lr).exp(), column: TableColumn::Middle });
    }
    let v = if ip > th.kink {
        ((nf + 1.0) / 8.0 - (nf + 3.0) * ip / 4.0) * (ll - lr) + (ip - 0.5) * ll
    } else {
        ((nf - 2.0) / 6.0 - nf * ip / 3.0) * ll
    };
    Some(MaximalBound { value: v.exp(), column: TableColumn::Wide })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> Exponent {
        Exponent::finite(v).unwrap()
    }

    #[test]
    fn mu_examples() {
        let (mu, mt) = mu_params(10.0, 1.0, 9.0).unwrap();
        assert!((mu - 0.1).abs() < 1e-15);
        assert!((mt - 10f64.powf(-4.0 / 3.0)).abs() < 1e-15);
        assert_eq!(mu_params(10.0, 1.0, 0.0).unwrap().0, 1.0);
        assert!((mu_params(10.0, 1.0, 10.0).unwrap().0 - 10f64.powf(-4.0 / 3.0)).abs() < 1e-15);
        assert!(mu_params(10.0, 11.0, 0.0).is_err());
        assert!(mu_params(10.0, 1.0, 10.5).is_err());
    }

    #[test]
    fn whole_ball_is_trivial() {
        let v = lambda_l2(3, 50.0, 50.0, 0.0).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        assert_eq!(v.branch, BoundBranch::LargeBelowKink);
    }

    #[test]
    fn exponent_parsing() {
        let e: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert!(e.is_infinite());
        let f: Exponent = serde_json::from_str("6").unwrap();
        assert!((f.value() - 6.0).abs() < 1e-15);
        assert!(serde_json::from_str::<Exponent>("0.5").is_err());
    }

    #[test]
    fn sigma_and_rho_anchor_values() {
        for n in 1..6 {
            assert_eq!(sogge_sigma(n, Exponent::TWO), 0.0);
            assert_eq!(kt_rho(n, Exponent::TWO), 0.0);
        }
        assert!((kt_rho(1, Exponent::INFINITY) + 1.0 / 6.0).abs() < 1e-15);
        assert!((kt_rho(2, Exponent::INFINITY)).abs() < 1e-15);
        assert!((kt_rho(4, Exponent::INFINITY) - 1.0).abs() < 1e-15);
        let _ = p(3.0);
    }

    #[test]
    fn region_examples() {
        assert_eq!(classify_region(10.0, &[9.99]), Region::Boundary);
        assert_eq!(classify_region(10.0, &[0.0, 0.0]), Region::Interior(0));
        assert_eq!(classify_region(10.0, &[11.0]), Region::Exterior);
        assert_eq!(classify_region(1e6, &[1e6 - 1e6 / 16.0]), Region::Interior(2));
    }

    #[test]
    fn annulus_at_two() {
        for j in 0..5 {
            let v = kt_annulus_bound(3, 1e4, Region::Interior(j), Exponent::TWO).unwrap();
            assert!((v - 2f64.powf(-(j as f64) / 2.0)).abs() < 1e-14);
        }
        let b = kt_annulus_bound(2, 1e3, Region::Boundary, Exponent::TWO).unwrap();
        assert!((b - 1e3f64.powf(-1.0 / 3.0)).abs() < 1e-14);
        assert!(kt_annulus_bound(2, 10.0, Region::Interior(9), Exponent::TWO).is_err());
    }
}
