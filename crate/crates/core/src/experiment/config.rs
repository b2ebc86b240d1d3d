//! TOML experiment configuration, with a per-experiment parameter table.
//!
//! Unknown keys are rejected with their position. Semantic checks collect
//! every violation before anything runs.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::Exponent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Eval,
    KernelCompare,
    SphaseCheck,
    PhaseIdentities,
    BoundsTable,
    Construct,
    Saturate,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::Eval,
        Self::KernelCompare,
        Self::SphaseCheck,
        Self::PhaseIdentities,
        Self::BoundsTable,
        Self::Construct,
        Self::Saturate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Eval => "eval",
            Self::KernelCompare => "kernel-compare",
            Self::SphaseCheck => "sphase-check",
            Self::PhaseIdentities => "phase-identities",
            Self::BoundsTable => "bounds-table",
            Self::Construct => "construct",
            Self::Saturate => "saturate",
        }
    }

    /// Name of the parameter table in the config file.
    pub fn table(&self) -> &'static str {
        match self {
            Self::Eval => "eval",
            Self::KernelCompare => "kernel_compare",
            Self::SphaseCheck => "sphase_check",
            Self::PhaseIdentities => "phase_identities",
            Self::BoundsTable => "bounds_table",
            Self::Construct => "construct",
            Self::Saturate => "saturate",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Multiplies every tolerance and band width.
    #[serde(default = "one")]
    pub tolerance_scale: f64,
    #[serde(default)]
    pub eval: Option<EvalParams>,
    #[serde(default)]
    pub kernel_compare: Option<KernelCompareParams>,
    #[serde(default)]
    pub sphase_check: Option<SphaseCheckParams>,
    #[serde(default)]
    pub phase_identities: Option<PhaseIdentitiesParams>,
    #[serde(default)]
    pub bounds_table: Option<BoundsTableParams>,
    #[serde(default)]
    pub construct: Option<ConstructParams>,
    #[serde(default)]
    pub saturate: Option<SaturateParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalParams {
    pub orthonormality_max_k: usize,
    /// Gauss–Hermite nodes; exact for products up to degree 2m - 1.
    pub quadrature_points: usize,
    pub residual_max_k: usize,
    pub residual_points: usize,
    pub orthonormality_tol: f64,
    pub residual_tol: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            orthonormality_max_k: 200,
            quadrature_points: 256,
            residual_max_k: 500,
            residual_points: 16,
            orthonormality_tol: 1e-8,
            residual_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCompareParams {
    #[serde(default)]
    pub cross_validation: Option<CrossValidation>,
    #[serde(default)]
    pub model: Option<ModelCheck>,
    #[serde(default)]
    pub size_bound: Option<SizeBound>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossValidation {
    pub n: usize,
    pub r_values: Vec<u64>,
    pub pairs: usize,
    pub min_separation: f64,
    pub max_radius: f64,
    pub tolerance: f64,
    pub imag_tolerance: f64,
    /// Relative tolerance handed to the contour quadrature.
    pub quadrature_tol: f64,
}

impl Default for CrossValidation {
    fn default() -> Self {
        Self {
            n: 1,
            r_values: vec![21, 41, 81],
            pairs: 50,
            min_separation: 0.05,
            max_radius: 0.9,
            tolerance: 1e-3,
            imag_tolerance: 1e-3,
            quadrature_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelCheck {
    pub n: usize,
    pub r_values: Vec<u64>,
    pub pairs: usize,
    pub min_separation: f64,
    pub max_radius: f64,
    /// Allowed range of rms(model) / rms(quadrature).
    pub band: [f64; 2],
}

impl Default for ModelCheck {
    fn default() -> Self {
        Self { n: 1, r_values: vec![81, 161], pairs: 30, min_separation: 0.1, max_radius: 0.8, band: [1.0 / 3.0, 3.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SizeBound {
    pub n: usize,
    pub r_values: Vec<u64>,
    pub mu_values: Vec<f64>,
    pub samples: usize,
    pub spread: f64,
    pub max_ratio: f64,
    pub slope_window: f64,
}

impl Default for SizeBound {
    fn default() -> Self {
        Self {
            n: 2,
            r_values: vec![102, 202, 402],
            mu_values: vec![0.2, 0.4],
            samples: 60,
            spread: 0.5,
            max_ratio: 50.0,
            slope_window: 0.15,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SphaseCheckParams {
    pub orders: Vec<usize>,
    /// Slope must be at most -(m - margin), one margin per order.
    pub slope_margins: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_points: usize,
    pub gaussian_lambdas: Vec<f64>,
    pub leading_tol: f64,
}

impl Default for SphaseCheckParams {
    fn default() -> Self {
        Self {
            orders: vec![1, 2],
            slope_margins: vec![0.2, 0.3],
            lambda_min: 1e2,
            lambda_max: 1e4,
            lambda_points: 9,
            gaussian_lambdas: vec![1e2, 1e3, 1e4],
            leading_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseIdentitiesParams {
    pub dims: Vec<usize>,
    pub samples: usize,
    pub hessian_samples: usize,
    pub factorization_tol: f64,
    pub curvature_tol: f64,
    pub hessian_closed_tol: f64,
    pub hessian_fd_tol: f64,
    pub fd_step: f64,
}

impl Default for PhaseIdentitiesParams {
    fn default() -> Self {
        Self {
            dims: vec![2, 3],
            samples: 10_000,
            hessian_samples: 200,
            factorization_tol: 1e-10,
            curvature_tol: 1e-5,
            hessian_closed_tol: 1e-6,
            hessian_fd_tol: 1e-4,
            fd_step: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsTableParams {
    pub dims: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub p_values: Vec<Exponent>,
    /// Radii r = λ^e for the maximal bound tables.
    pub r_exponents: Vec<f64>,
    pub mu_grid: usize,
    pub seam_tol: f64,
    pub slope_tol: f64,
    pub table_tol: f64,
}

impl Default for BoundsTableParams {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3, 4],
            lambdas: vec![1e2, 1e4, 1e6],
            p_values: [2.0, 2.5, 3.5, 5.0, 8.0, 12.0]
                .iter()
                .map(|&p| Exponent::finite(p).expect("p >= 1"))
                .chain([Exponent::INFINITY])
                .collect(),
            r_exponents: vec![-1.5, -0.6, -0.1, 0.5, 0.9],
            mu_grid: 400,
            seam_tol: 1e-12,
            slope_tol: 1e-6,
            table_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeEntry {
    pub n: usize,
    pub big_n: u64,
    pub j: u32,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstructParams {
    pub window: f64,
    pub bins: usize,
    /// Median amplitude must be within this factor of the target.
    pub amplitude_factor: f64,
    pub coherence_limit: f64,
    pub tubes: Vec<TubeEntry>,
}

impl Default for ConstructParams {
    fn default() -> Self {
        Self {
            window: 2.0,
            bins: 8,
            amplitude_factor: 10.0,
            coherence_limit: std::f64::consts::FRAC_PI_2,
            // the j = 0 tubes of the saturation sweep, δ = λ^(-1/4), and one 1-D tube
            tubes: sweep_levels()
                .into_iter()
                .map(|n| TubeEntry { n: 2, big_n: n, j: 0, delta: ((2 * n + 2) as f64).powf(-0.125) })
                .chain([TubeEntry { n: 1, big_n: 2000, j: 2, delta: 0.4 }])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaturateParams {
    pub p_values: Vec<Exponent>,
    /// Largest allowed max/min of the ratios in one sweep.
    pub band_ratio: f64,
    /// Largest allowed |log-log slope| of the ratios against λ.
    pub slope_window: f64,
    pub case2: Option<Case2>,
    pub case3: Option<Case3>,
    pub random: Option<RandomCheck>,
}

impl Default for SaturateParams {
    fn default() -> Self {
        Self {
            p_values: vec![Exponent::TWO],
            band_ratio: 10.0,
            slope_window: 0.1,
            case2: Some(Case2::default()),
            case3: Some(Case3::default()),
            random: Some(RandomCheck::default()),
        }
    }
}

fn sweep_levels() -> Vec<u64> {
    vec![200, 400, 800, 1600, 3200]
}

/// B(ν, r) centered on a tube, r = λ^e, δ = (λμ^{1/2}/r)^{-1/2}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Case2 {
    pub n: usize,
    pub big_n: Vec<u64>,
    pub j: u32,
    pub r_exponent: f64,
}

impl Default for Case2 {
    fn default() -> Self {
        Self { n: 2, big_n: sweep_levels(), j: 0, r_exponent: 0.5 }
    }
}

/// One dimension, e = h_N on B(λ - r/2, r) with r = λ^e.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Case3 {
    pub big_n: Vec<u64>,
    pub r_exponent: f64,
}

impl Default for Case3 {
    fn default() -> Self {
        Self { big_n: sweep_levels(), r_exponent: 0.5 }
    }
}

/// Random eigenfunctions measured on the cube of half side r = λ^e around 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomCheck {
    pub n: usize,
    pub big_n: Vec<u64>,
    pub count: usize,
    pub r_exponent: f64,
    /// C_upper = factor × median of the sweep ratios.
    pub upper_factor: f64,
}

impl Default for RandomCheck {
    fn default() -> Self {
        Self { n: 2, big_n: sweep_levels(), count: 100, r_exponent: 0.5, upper_factor: 10.0 }
    }
}

/// Every problem found in a config.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn single(msg: impl Into<String>) -> Self {
        Self { violations: vec![msg.into()] }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::single(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::single(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|mut e| {
        for v in &mut e.violations {
            *v = format!("{}: {v}", path.display());
        }
        e
    })
}

struct Checker {
    out: Vec<String>,
}

impl Checker {
    fn req(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.out.push(msg());
        }
    }

    fn positive(&mut self, key: &str, v: f64) {
        self.req(v > 0.0 && v.is_finite(), || format!("{key} must be positive and finite, got {v}"));
    }

    fn nonempty<T>(&mut self, key: &str, v: &[T]) {
        self.req(!v.is_empty(), || format!("{key} must not be empty"));
    }

    fn count(&mut self, key: &str, v: usize) {
        self.req(v > 0, || format!("{key} must be at least 1"));
    }

    fn kernel_levels(&mut self, key: &str, n: usize, rs: &[u64]) {
        self.nonempty(key, rs);
        self.req(n >= 1, || format!("{key}: dimension must be at least 1"));
        for &r in rs {
            self.req(r as usize >= n && (r - n as u64).is_multiple_of(2), || {
                format!("{key}: R = {r} is not an eigenvalue 2N + n for n = {n}")
            });
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut c = Checker { out: Vec::new() };
        c.positive("tolerance_scale", self.tolerance_scale);
        let present: Vec<ExperimentKind> = ExperimentKind::ALL
            .into_iter()
            .filter(|k| match k {
                ExperimentKind::Eval => self.eval.is_some(),
                ExperimentKind::KernelCompare => self.kernel_compare.is_some(),
                ExperimentKind::SphaseCheck => self.sphase_check.is_some(),
                ExperimentKind::PhaseIdentities => self.phase_identities.is_some(),
                ExperimentKind::BoundsTable => self.bounds_table.is_some(),
                ExperimentKind::Construct => self.construct.is_some(),
                ExperimentKind::Saturate => self.saturate.is_some(),
            })
            .collect();
        c.req(present.contains(&self.experiment), || {
            format!("experiment = \"{}\" needs a [{}] table", self.experiment, self.experiment.table())
        });
        for k in present.iter().filter(|k| **k != self.experiment) {
            c.out.push(format!("[{}] does not belong to experiment \"{}\"", k.table(), self.experiment));
        }
        if let Some(p) = &self.eval {
            c.count("eval.orthonormality_max_k", p.orthonormality_max_k);
            c.count("eval.residual_max_k", p.residual_max_k);
            c.count("eval.residual_points", p.residual_points);
            c.req(2 * p.quadrature_points > 2 * p.orthonormality_max_k + 1, || {
                format!(
                    "eval.quadrature_points = {} does not integrate products of degree {} exactly",
                    p.quadrature_points,
                    2 * p.orthonormality_max_k
                )
            });
            c.positive("eval.orthonormality_tol", p.orthonormality_tol);
            c.positive("eval.residual_tol", p.residual_tol);
        }
        if let Some(p) = &self.kernel_compare {
            c.req(p.cross_validation.is_some() || p.model.is_some() || p.size_bound.is_some(), || {
                "kernel_compare needs at least one of cross_validation, model, size_bound".into()
            });
            if let Some(v) = &p.cross_validation {
                c.kernel_levels("kernel_compare.cross_validation.r_values", v.n, &v.r_values);
                c.count("kernel_compare.cross_validation.pairs", v.pairs);
                c.req(v.max_radius > 0.0 && v.max_radius <= 2.0, || "cross_validation.max_radius must lie in (0, 2]".into());
                c.req(v.min_separation < v.max_radius, || "cross_validation.min_separation must be below max_radius".into());
                c.positive("kernel_compare.cross_validation.tolerance", v.tolerance);
                c.positive("kernel_compare.cross_validation.imag_tolerance", v.imag_tolerance);
                c.positive("kernel_compare.cross_validation.quadrature_tol", v.quadrature_tol);
            }
            if let Some(v) = &p.model {
                c.kernel_levels("kernel_compare.model.r_values", v.n, &v.r_values);
                c.count("kernel_compare.model.pairs", v.pairs);
                c.req(v.max_radius > 0.0 && v.max_radius < 1.0, || "model.max_radius must lie in (0, 1)".into());
                c.req(v.band[0] > 0.0 && v.band[0] < v.band[1], || "model.band must be increasing and positive".into());
            }
            if let Some(v) = &p.size_bound {
                c.kernel_levels("kernel_compare.size_bound.r_values", v.n, &v.r_values);
                c.nonempty("kernel_compare.size_bound.mu_values", &v.mu_values);
                for &m in &v.mu_values {
                    c.req(m > 0.0 && m <= 1.0, || format!("size_bound.mu_values: μ = {m} outside (0, 1]"));
                }
                c.count("kernel_compare.size_bound.samples", v.samples);
                c.req((0.0..1.0).contains(&v.spread), || "size_bound.spread must lie in [0, 1)".into());
                c.positive("kernel_compare.size_bound.max_ratio", v.max_ratio);
                c.positive("kernel_compare.size_bound.slope_window", v.slope_window);
            }
        }
        if let Some(p) = &self.sphase_check {
            c.nonempty("sphase_check.orders", &p.orders);
            c.req(p.orders.len() == p.slope_margins.len(), || {
                "sphase_check.slope_margins needs one entry per order".into()
            });
            for &m in &p.orders {
                c.req(m >= 1, || "sphase_check.orders must be at least 1".into());
            }
            c.req(p.lambda_min > 0.0 && p.lambda_min < p.lambda_max, || "sphase_check needs 0 < lambda_min < lambda_max".into());
            c.req(p.lambda_points >= 3, || "sphase_check.lambda_points must be at least 3".into());
            c.nonempty("sphase_check.gaussian_lambdas", &p.gaussian_lambdas);
            c.positive("sphase_check.leading_tol", p.leading_tol);
        }
        if let Some(p) = &self.phase_identities {
            c.nonempty("phase_identities.dims", &p.dims);
            for &n in &p.dims {
                c.req(n >= 1, || "phase_identities.dims must be positive".into());
            }
            c.count("phase_identities.samples", p.samples);
            c.count("phase_identities.hessian_samples", p.hessian_samples);
            for (k, v) in [
                ("factorization_tol", p.factorization_tol),
                ("curvature_tol", p.curvature_tol),
                ("hessian_closed_tol", p.hessian_closed_tol),
                ("hessian_fd_tol", p.hessian_fd_tol),
                ("fd_step", p.fd_step),
            ] {
                c.positive(&format!("phase_identities.{k}"), v);
            }
        }
        if let Some(p) = &self.bounds_table {
            c.nonempty("bounds_table.dims", &p.dims);
            c.nonempty("bounds_table.lambdas", &p.lambdas);
            c.nonempty("bounds_table.p_values", &p.p_values);
            for &n in &p.dims {
                c.req(n >= 1, || "bounds_table.dims must be positive".into());
            }
            for &l in &p.lambdas {
                c.req(l > 1.0 && l.is_finite(), || format!("bounds_table.lambdas: λ = {l} must exceed 1"));
            }
            for pe in &p.p_values {
                c.req(pe.inv() <= 0.5, || format!("bounds_table.p_values: p = {pe} is below 2"));
            }
            for &e in &p.r_exponents {
                c.req(e <= 1.0, || format!("bounds_table.r_exponents: r = λ^{e} exceeds λ"));
            }
            c.req(p.mu_grid >= 2, || "bounds_table.mu_grid must be at least 2".into());
            c.positive("bounds_table.seam_tol", p.seam_tol);
            c.positive("bounds_table.slope_tol", p.slope_tol);
            c.positive("bounds_table.table_tol", p.table_tol);
        }
        if let Some(p) = &self.construct {
            c.req(p.window >= 1.0, || "construct.window must be at least 1".into());
            c.count("construct.bins", p.bins);
            c.req(p.amplitude_factor > 1.0, || "construct.amplitude_factor must exceed 1".into());
            c.positive("construct.coherence_limit", p.coherence_limit);
            c.nonempty("construct.tubes", &p.tubes);
            for (i, t) in p.tubes.iter().enumerate() {
                c.req(t.n >= 1, || format!("construct.tubes[{i}]: dimension must be positive"));
                c.req(t.delta > 0.0, || format!("construct.tubes[{i}]: δ must be positive"));
            }
        }
        if let Some(p) = &self.saturate {
            c.nonempty("saturate.p_values", &p.p_values);
            for pe in &p.p_values {
                c.req(pe.inv() <= 0.5, || format!("saturate.p_values: p = {pe} is below 2"));
            }
            c.req(p.band_ratio > 1.0, || "saturate.band_ratio must exceed 1".into());
            c.positive("saturate.slope_window", p.slope_window);
            c.req(p.case2.is_some() || p.case3.is_some(), || "saturate needs case2 or case3".into());
            if let Some(s) = &p.case2 {
                c.req(s.n >= 2, || "saturate.case2.n must be at least 2".into());
                c.req(s.big_n.len() >= 2, || "saturate.case2.big_n needs at least two levels for a trend".into());
                c.req(s.r_exponent > -1.0 && s.r_exponent < 1.0, || "saturate.case2.r_exponent must lie in (-1, 1)".into());
            }
            if let Some(s) = &p.case3 {
                c.req(s.big_n.len() >= 2, || "saturate.case3.big_n needs at least two levels for a trend".into());
                c.req(s.r_exponent > 0.0 && s.r_exponent < 1.0, || "saturate.case3.r_exponent must lie in (0, 1)".into());
            }
            if let Some(s) = &p.random {
                c.req(s.n >= 1, || "saturate.random.n must be positive".into());
                c.nonempty("saturate.random.big_n", &s.big_n);
                c.count("saturate.random.count", s.count);
                c.req(s.upper_factor > 1.0, || "saturate.random.upper_factor must exceed 1".into());
            }
        }
        if c.out.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations: c.out })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config("experiment = \"bounds-table\"\n[bounds_table]\n").unwrap();
        assert_eq!(c.bounds_table.unwrap().dims, vec![1, 2, 3, 4]);
    }

    #[test]
    fn unknown_key_reports_position() {
        let e = parse_config("experiment = \"eval\"\n[eval]\nbogus = 3\n").unwrap_err();
        assert!(e.violations[0].contains("bogus"), "{e}");
        assert!(e.violations[0].contains("line 3"), "{e}");
    }

    #[test]
    fn collects_every_violation() {
        let text = "experiment = \"saturate\"\ntolerance_scale = -1\n[saturate]\np_values = []\n[eval]\n";
        let e = parse_config(text).unwrap_err();
        assert!(e.violations.len() >= 3, "{e}");
    }

    #[test]
    fn empty_lambda_grid_is_rejected() {
        assert!(parse_config("experiment = \"bounds-table\"\n[bounds_table]\nlambdas = []\n").is_err());
    }
}
