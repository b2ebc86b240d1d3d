//! Eigenspaces of the harmonic oscillator -Δ + |x|^2 on R^n.
//!
//! The eigenvalue λ² = 2N + n has eigenspace spanned by products of
//! normalized Hermite functions with |α| = N.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::hermite_batch;
use crate::sum::CompensatedSum;

/// Largest eigenspace [`enumerate_eigenspace`] will list.
pub const ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn order(&self) -> u64 {
        self.0.iter().map(|&a| a as u64).sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// The eigenspace with level N = |α| in dimension n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EigenSpace {
    pub n: usize,
    pub level: u64,
}

impl EigenSpace {
    pub fn new(n: usize, level: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        Ok(Self { n, level })
    }

    /// From λ² = 2N + n, rejecting values of the wrong parity.
    pub fn from_lambda_sq(n: usize, lambda_sq: u64) -> Result<Self> {
        if n == 0 || lambda_sq < n as u64 || !(lambda_sq - n as u64).is_multiple_of(2) {
            return Err(Error::ParityMismatch { n, lambda_sq });
        }
        Self::new(n, (lambda_sq - n as u64) / 2)
    }

    pub fn lambda_sq(&self) -> u64 {
        2 * self.level + self.n as u64
    }

    pub fn lambda(&self) -> f64 {
        (self.lambda_sq() as f64).sqrt()
    }

    /// binom(N + n - 1, n - 1), saturating at u128::MAX.
    pub fn multiplicity(&self) -> u128 {
        let mut m: u128 = 1;
        let k = (self.n - 1) as u128;
        for i in 1..=k {
            let top = self.level as u128 + i;
            m = match m.checked_mul(top) {
                Some(v) => v / i,
                None => return u128::MAX,
            };
        }
        m
    }
}

/// All α with |α| = N in lexicographic order.
pub fn enumerate_eigenspace(space: EigenSpace) -> Result<Vec<MultiIndex>> {
    let mult = space.multiplicity();
    if mult > ENUMERATION_CAP {
        return Err(Error::EigenspaceTooLarge { multiplicity: mult, cap: ENUMERATION_CAP });
    }
    let n = space.n;
    let big_n = u32::try_from(space.level)
        .map_err(|_| Error::Domain(format!("level {} too large", space.level)))?;
    let mut out = Vec::with_capacity(mult as usize);
    let mut a = vec![0u32; n];
    a[n - 1] = big_n;
    loop {
        out.push(MultiIndex(a.clone()));
        // bump the rightmost position that still has mass to its right
        let mut i = n as isize - 2;
        while i >= 0 && a[i as usize + 1..].iter().all(|&v| v == 0) {
            i -= 1;
        }
        if i < 0 {
            break;
        }
        let i = i as usize;
        a[i] += 1;
        for v in a[i + 1..n - 1].iter_mut() {
            *v = 0;
        }
        let used: u32 = a[..n - 1].iter().sum();
        a[n - 1] = big_n - used;
    }
    Ok(out)
}

/// A finite combination sum c_α h_α in one eigenspace.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    space: EigenSpace,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl Eigenfunction {
    pub fn new(space: EigenSpace, coeffs: BTreeMap<MultiIndex, f64>) -> Result<Self> {
        for a in coeffs.keys() {
            if a.dim() != space.n || a.order() != space.level {
                return Err(Error::Domain(format!("index {:?} is not in the eigenspace", a.0)));
            }
        }
        Ok(Self { space, coeffs })
    }

    pub fn basis(space: EigenSpace, alpha: MultiIndex) -> Result<Self> {
        Self::new(space, BTreeMap::from([(alpha, 1.0)]))
    }

    /// Independent standard normal coefficients on the whole eigenspace.
    pub fn random(space: EigenSpace, rng: &mut impl Rng) -> Result<Self> {
        let coeffs = enumerate_eigenspace(space)?
            .into_iter()
            .map(|a| (a, rng.sample::<f64, _>(StandardNormal)))
            .collect();
        Self::new(space, coeffs)
    }

    pub fn space(&self) -> EigenSpace {
        self.space
    }

    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, f64> {
        &self.coeffs
    }

    /// The basis functions are orthonormal, so this is the coefficient norm.
    pub fn global_l2_norm(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for c in self.coeffs.values() {
            s.add(c * c);
        }
        s.value().sqrt()
    }

    /// Largest order used on each axis.
    pub fn max_orders(&self) -> Vec<usize> {
        let mut m = vec![0usize; self.space.n];
        for a in self.coeffs.keys() {
            for (j, &v) in a.0.iter().enumerate() {
                m[j] = m[j].max(v as usize);
            }
        }
        m
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.space.n {
            return Err(Error::Domain(format!("point has dimension {}, expected {}", x.len(), self.space.n)));
        }
        let tables: Vec<Vec<f64>> = self
            .max_orders()
            .iter()
            .zip(x)
            .map(|(&k, &xi)| hermite_batch(k, xi))
            .collect();
        let mut s = CompensatedSum::new();
        for (a, c) in &self.coeffs {
            let mut p = *c;
            for (j, &aj) in a.0.iter().enumerate() {
                p *= tables[j][aj as usize];
            }
            s.add(p);
        }
        Ok(s.value())
    }
}

/// Value of the projection kernel onto eigenvalue λ² at (x, y).
///
/// Sums h_α(x) h_α(y) over |α| = N as the z^N coefficient of the product of
/// the coordinate series sum_k h_k(x_j) h_k(y_j) z^k, with compensated
/// convolutions.
pub fn projection_kernel_direct(n: usize, lambda_sq: u64, x: &[f64], y: &[f64]) -> Result<f64> {
    let space = EigenSpace::from_lambda_sq(n, lambda_sq)?;
    if x.len() != n || y.len() != n {
        return Err(Error::Domain("points must have the eigenspace dimension".into()));
    }
    let big_n = space.level as usize;
    let series: Vec<Vec<f64>> = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let hx = hermite_batch(big_n, xi);
            let hy = hermite_batch(big_n, yi);
            hx.iter().zip(&hy).map(|(a, b)| a * b).collect()
        })
        .collect();
    let mut acc = series[0].clone();
    for (j, p) in series.iter().enumerate().skip(1) {
        let last = j + 1 == n;
        let lo = if last { big_n } else { 0 };
        let mut next = vec![0.0; big_n + 1];
        for (m, slot) in next.iter_mut().enumerate().skip(lo) {
            let mut s = CompensatedSum::new();
            for k in 0..=m {
                s.add(acc[k] * p[m - k]);
            }
            *slot = s.value();
        }
        acc = next;
    }
    Ok(acc[big_n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite_normalized;

    #[test]
    fn multiplicity_and_order() {
        let s = EigenSpace::new(2, 2).unwrap();
        let list = enumerate_eigenspace(s).unwrap();
        let want: Vec<MultiIndex> = [[0, 2], [1, 1], [2, 0]].iter().map(|a| MultiIndex(a.to_vec())).collect();
        assert_eq!(list, want);
        let s3 = EigenSpace::new(3, 7).unwrap();
        assert_eq!(enumerate_eigenspace(s3).unwrap().len() as u128, s3.multiplicity());
        assert_eq!(s3.multiplicity(), 36);
    }

    #[test]
    fn enumeration_is_sorted_and_unique() {
        let s = EigenSpace::new(4, 6).unwrap();
        let list = enumerate_eigenspace(s).unwrap();
        assert!(list.windows(2).all(|w| w[0] < w[1]));
        assert!(list.iter().all(|a| a.order() == 6));
    }

    #[test]
    fn cap_is_enforced() {
        let s = EigenSpace::new(4, 1000).unwrap();
        assert!(matches!(enumerate_eigenspace(s), Err(Error::EigenspaceTooLarge { .. })));
    }

    #[test]
    fn parity_mismatch() {
        assert!(matches!(EigenSpace::from_lambda_sq(2, 7), Err(Error::ParityMismatch { .. })));
        assert_eq!(EigenSpace::from_lambda_sq(2, 8).unwrap().level, 3);
    }

    #[test]
    fn kernel_matches_explicit_sum() {
        let (x, y) = ([0.3, -1.1, 0.8], [0.2, 0.5, -0.4]);
        let s = EigenSpace::new(3, 9).unwrap();
        let mut want = 0.0;
        for a in enumerate_eigenspace(s).unwrap() {
            let mut p = 1.0;
            for j in 0..3 {
                p *= hermite_normalized(a.0[j] as usize, x[j]) * hermite_normalized(a.0[j] as usize, y[j]);
            }
            want += p;
        }
        let got = projection_kernel_direct(3, s.lambda_sq(), &x, &y).unwrap();
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn kernel_is_symmetric() {
        let x = [0.7, 2.0];
        let y = [-1.3, 0.1];
        let a = projection_kernel_direct(2, 82, &x, &y).unwrap();
        let b = projection_kernel_direct(2, 82, &y, &x).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        let s = EigenSpace::new(2, 3).unwrap();
        let e = Eigenfunction::basis(s, MultiIndex(vec![1, 2])).unwrap();
        assert!(e.eval(&[0.1]).is_err());
        assert!(Eigenfunction::basis(s, MultiIndex(vec![1, 1])).is_err());
    }
}
