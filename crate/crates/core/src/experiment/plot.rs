//! Plot-ready CSV tables derived from a finished run directory.

use std::path::Path;
use std::str::FromStr;

use super::{fmt_f, Table, MANIFEST_FILE};
use crate::bounds::{kt_rho, lambda_lp, sogge_sigma, thresholds, BoundQuery, Exponent};
use crate::hermite::{hermite_normalized, turning_point};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    HermiteProfile,
    RhoSigma,
    LambdaVsR,
    LambdaVsMu,
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hermite-profile" => Ok(Self::HermiteProfile),
            "rho-sigma" => Ok(Self::RhoSigma),
            "lambda-vs-r" => Ok(Self::LambdaVsR),
            "lambda-vs-mu" => Ok(Self::LambdaVsMu),
            _ => Err(format!("unknown plot kind {s:?}; expected hermite-profile, rho-sigma, lambda-vs-r or lambda-vs-mu")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    /// Hermite order for the profile.
    pub k: usize,
    pub n: usize,
    pub lambda: f64,
    pub points: usize,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { k: 100, n: 2, lambda: 1e4, points: 801 }
    }
}

/// Builds the table for `kind`. `run_dir` must hold a completed run.
pub fn emit_plot_data(run_dir: &Path, kind: PlotKind, opts: &PlotOptions) -> Result<Table> {
    if !run_dir.join(MANIFEST_FILE).is_file() {
        return Err(Error::Domain(format!("{} has no {MANIFEST_FILE}", run_dir.display())));
    }
    let m = opts.points.max(2);
    let grid = |a: f64, b: f64| (0..m).map(move |i| a + (b - a) * i as f64 / (m - 1) as f64);
    let p_values = [Exponent::TWO, Exponent::finite(4.0)?, Exponent::finite(8.0)?, Exponent::INFINITY];
    Ok(match kind {
        PlotKind::HermiteProfile => {
            let mut t = Table::new(&["x", "h", "turning_point"]);
            let u = turning_point(opts.k);
            for x in grid(-16.0, 16.0) {
                t.push(vec![fmt_f(x), fmt_f(hermite_normalized(opts.k, x)), fmt_f(u)]);
            }
            t
        }
        PlotKind::RhoSigma => {
            let th = thresholds(opts.n);
            let mut t = Table::new(&["inv_p", "sigma", "rho", "marker"]);
            for ip in grid(0.0, 0.5) {
                let e = Exponent::from_inverse(ip)?;
                t.push(vec![fmt_f(ip), fmt_f(sogge_sigma(opts.n, e)), fmt_f(kt_rho(opts.n, e)), String::new()]);
            }
            for (ip, name) in [(th.kink, "kink"), (th.stein_tomas, "stein-tomas")] {
                let e = Exponent::from_inverse(ip)?;
                t.push(vec![fmt_f(ip), fmt_f(sogge_sigma(opts.n, e)), fmt_f(kt_rho(opts.n, e)), name.into()]);
            }
            t
        }
        PlotKind::LambdaVsR => {
            let mut t = Table::new(&["p", "mu", "r", "Lambda", "branch"]);
            let lambda = opts.lambda;
            for mu in [lambda.powf(-4.0 / 3.0), lambda.powf(-0.5), 1.0] {
                for p in p_values {
                    for lr in grid(-lambda.ln(), lambda.ln()) {
                        let r = lr.exp().min(lambda);
                        let b = lambda_lp(&BoundQuery { n: opts.n, lambda, r, nu: lambda * (1.0 - mu), p })?;
                        t.push(vec![p.to_string(), fmt_f(b.mu), fmt_f(r), fmt_f(b.value), format!("{:?}", b.branch)]);
                    }
                }
            }
            t
        }
        PlotKind::LambdaVsMu => {
            let mut t = Table::new(&["p", "r", "mu", "Lambda", "branch"]);
            let lambda = opts.lambda;
            for r in [lambda.powf(-0.5), 1.0, lambda.sqrt()] {
                for p in p_values {
                    for lm in grid(-4.0 / 3.0 * lambda.ln(), 0.0) {
                        let nu = lambda * (1.0 - lm.exp());
                        let b = lambda_lp(&BoundQuery { n: opts.n, lambda, r, nu, p })?;
                        t.push(vec![p.to_string(), fmt_f(r), fmt_f(b.mu), fmt_f(b.value), format!("{:?}", b.branch)]);
                    }
                }
            }
            t
        }
    })
}
