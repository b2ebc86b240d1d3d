//! The measurements behind each experiment kind.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::config::*;
use super::{fmt_f, Produced, Table, Verdicts};
use crate::bounds::{
    branch_log_value, kt_rho, lambda_l2, lambda_lp, maximal_local_bound, mu_params, select_branch, sogge_sigma,
    sup_over_centers, thresholds, BoundBranch, BoundQuery, Exponent,
};
use crate::construct::{build_concentrated, measure_ratio, saturation_ratio, TubeSpec};
use crate::hermite::{hermite_batch, hermite_function_rule, hermite_normalized, turning_point};
use crate::mehler::{kernel_bound_check, kernel_quadrature, stationary_phase_model, BoundSampleSpec, KernelQuery};
use crate::normquad::{global_l2_norm, BoxGram};
use crate::phase::{
    curvature_and_hessian, mixed_hessian_fd, phase_geometry, psi, psi_prime, psi_prime_factored_from, psi_second,
    spectrum, CriticalPoint,
};
use crate::spectral::{projection_kernel_direct, EigenSpace, Eigenfunction, MultiIndex};
use crate::sphase::{cubic_problem, gaussian_problem, least_squares_slope, sp_expansion, sp_remainder_slope, SlopeStatus};

pub(crate) fn dispatch(cfg: &ExperimentConfig) -> Produced {
    let mut v = Verdicts::new(cfg.tolerance_scale);
    let (table, derived) = match cfg.experiment {
        ExperimentKind::Eval => eval(&cfg.eval.clone().unwrap_or_default(), &mut v),
        ExperimentKind::KernelCompare => kernel_compare(&cfg.kernel_compare.clone().unwrap_or_default(), cfg.seed, &mut v),
        ExperimentKind::SphaseCheck => sphase_check(&cfg.sphase_check.clone().unwrap_or_default(), &mut v),
        ExperimentKind::PhaseIdentities => {
            phase_identities(&cfg.phase_identities.clone().unwrap_or_default(), cfg.seed, &mut v)
        }
        ExperimentKind::BoundsTable => bounds_table(&cfg.bounds_table.clone().unwrap_or_default(), &mut v),
        ExperimentKind::Construct => construct(&cfg.construct.clone().unwrap_or_default(), &mut v),
        ExperimentKind::Saturate => saturate(&cfg.saturate.clone().unwrap_or_default(), cfg.seed, &mut v),
    };
    Produced { table, verdicts: v, derived }
}

fn fmt_point(x: &[f64]) -> String {
    x.iter().map(|c| fmt_f(*c)).collect::<Vec<_>>().join(";")
}

fn pname(p: Exponent) -> String {
    p.to_string()
}

/// Uniform point in the ball of the given radius.
fn ball_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..radius)).collect();
        if x.iter().map(|c| c * c).sum::<f64>() < radius * radius {
            return x;
        }
    }
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn sample_pairs(rng: &mut ChaCha8Rng, n: usize, count: usize, radius: f64, min_sep: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = ball_point(rng, n, radius);
        let y = ball_point(rng, n, radius);
        if dist(&x, &y) >= min_sep {
            out.push((x, y));
        }
    }
    out
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0f64, f64::max)
}

// ---------------------------------------------------------------- eval

fn eval(p: &EvalParams, v: &mut Verdicts) -> (Table, serde_json::Value) {
    let mut t = Table::new(&["check", "k", "value"]);
    let kmax = p.orthonormality_max_k;
    let (nodes, weights) = hermite_function_rule(p.quadrature_points);
    let rows: Vec<Vec<f64>> = nodes.par_iter().map(|&x| hermite_batch(kmax, x)).collect();
    let dev: Vec<f64> = (0..=kmax)
        .into_par_iter()
        .map(|j| {
            let mut worst = 0.0f64;
            for k in 0..=kmax {
                let g: f64 = rows.iter().zip(&weights).map(|(h, w)| w * h[j] * h[k]).sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
            worst
        })
        .collect();
    for (j, d) in dev.iter().enumerate() {
        t.push(vec!["orthonormality".into(), j.to_string(), fmt_f(*d)]);
    }
    let orth = max_of(dev.iter().copied());
    v.at_most(format!("orthonormality max |<h_j,h_k> - δ_jk|, j,k <= {kmax}"), orth, p.orthonormality_tol);

    let pts = p.residual_points;
    let res: Vec<(usize, f64)> = (1..=p.residual_max_k)
        .into_par_iter()
        .filter_map(|k| {
            let u = turning_point(k);
            let edge = u - u.powf(-1.0 / 3.0);
            if edge <= 0.0 {
                return None;
            }
            let s = 0.01 / u;
            let e = 2.0 * k as f64 + 1.0;
            let mut hmax = 0.0f64;
            let mut worst = 0.0f64;
            for i in 0..pts {
                let x = edge * (-1.0 + (2 * i + 1) as f64 / pts as f64);
                let f = |d: f64| hermite_normalized(k, x + d * s);
                let h = f(0.0);
                let d2 = (-f(2.0) + 16.0 * f(1.0) - 30.0 * h + 16.0 * f(-1.0) - f(-2.0)) / (12.0 * s * s);
                worst = worst.max((-d2 + x * x * h - e * h).abs());
                hmax = hmax.max(h.abs());
            }
            Some((k, worst / (e * hmax)))
        })
        .collect();
    for &(k, r) in &res {
        t.push(vec!["eigen-residual".into(), k.to_string(), fmt_f(r)]);
    }
    let worst = max_of(res.iter().map(|r| r.1));
    v.at_most(
        format!("eigen-equation relative residual, k <= {}, oscillatory region", p.residual_max_k),
        worst,
        p.residual_tol,
    );
    (t, json!({ "orthonormality_error": orth, "residual": worst }))
}

// ---------------------------------------------------------------- kernel-compare

fn kernel_compare(p: &KernelCompareParams, seed: u64, v: &mut Verdicts) -> (Table, serde_json::Value) {
    let mut t = Table::new(&["section", "R", "x", "y", "quadrature", "imag", "reference", "relative_error"]);
    let mut derived = serde_json::Map::new();
    if let Some(c) = &p.cross_validation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for &r in &c.r_values {
            let pairs = sample_pairs(&mut rng, c.n, c.pairs, c.max_radius, c.min_separation);
            let floor = 1e-2 * (r as f64).powf((c.n as f64 - 2.0) / 2.0);
            let out: Vec<crate::Result<(f64, f64, f64)>> = pairs
                .par_iter()
                .map(|(x, y)| {
                    let q = KernelQuery::new(c.n, r, x.clone(), y.clone())?;
                    let kv = kernel_quadrature(&q, c.quadrature_tol)?;
                    let l = (r as f64).sqrt();
                    let xs: Vec<f64> = x.iter().map(|a| a * l).collect();
                    let ys: Vec<f64> = y.iter().map(|a| a * l).collect();
                    Ok((kv.re, kv.im, projection_kernel_direct(c.n, r, &xs, &ys)?))
                })
                .collect();
            let (mut worst, mut worst_im) = (0.0f64, 0.0f64);
            for ((x, y), o) in pairs.iter().zip(out) {
                match o {
                    Ok((re, im, d)) => {
                        let scale = d.abs().max(floor);
                        let rel = (re - d).abs() / scale;
                        worst = worst.max(rel);
                        worst_im = worst_im.max(im.abs() / scale);
                        t.push(vec![
                            "cross-validation".into(),
                            r.to_string(),
                            fmt_point(x),
                            fmt_point(y),
                            fmt_f(re),
                            fmt_f(im),
                            fmt_f(d),
                            fmt_f(rel),
                        ]);
                    }
                    Err(e) => v.error(format!("kernel R={r} x={x:?} y={y:?}"), e),
                }
            }
            v.at_most(format!("kernel quadrature vs spectral sum, n={} R={r}", c.n), worst, c.tolerance);
            v.at_most(format!("kernel imaginary residual, n={} R={r}", c.n), worst_im, c.imag_tolerance);
            derived.insert(format!("cross_validation_R{r}"), json!({ "relative": worst, "imag": worst_im }));
        }
    }
    if let Some(c) = &p.model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        for &r in &c.r_values {
            let pairs = sample_pairs(&mut rng, c.n, c.pairs, c.max_radius, c.min_separation);
            let out: Vec<crate::Result<(f64, f64)>> = pairs
                .par_iter()
                .map(|(x, y)| {
                    let q = KernelQuery::new(c.n, r, x.clone(), y.clone())?;
                    Ok((kernel_quadrature(&q, 1e-8)?.re, stationary_phase_model(&q)?.re))
                })
                .collect();
            let (mut sq, mut sm, mut sd) = (0.0, 0.0, 0.0);
            for ((x, y), o) in pairs.iter().zip(out) {
                match o {
                    Ok((kq, km)) => {
                        sq += kq * kq;
                        sm += km * km;
                        sd += (kq - km) * (kq - km);
                        t.push(vec![
                            "leading-terms".into(),
                            r.to_string(),
                            fmt_point(x),
                            fmt_point(y),
                            fmt_f(kq),
                            fmt_f(0.0),
                            fmt_f(km),
                            fmt_f((kq - km).abs() / kq.abs().max(1e-300)),
                        ]);
                    }
                    Err(e) => v.error(format!("leading terms R={r} x={x:?} y={y:?}"), e),
                }
            }
            let ratio = (sm / sq).sqrt();
            v.within(format!("rms(leading terms)/rms(quadrature), n={} R={r}", c.n), ratio, c.band[0], c.band[1]);
            derived.insert(format!("model_R{r}"), json!({ "rms_ratio": ratio, "relative_rms_residual": (sd / sq).sqrt() }));
        }
    }
    if let Some(c) = &p.size_bound {
        for &mu in &c.mu_values {
            let mut pts = Vec::new();
            for &r in &c.r_values {
                let spec = BoundSampleSpec { mu, count: c.samples, seed, spread: c.spread };
                match kernel_bound_check(c.n, r, &spec) {
                    Ok(rep) => {
                        for s in &rep.samples {
                            t.push(vec![
                                format!("size-bound mu={mu}"),
                                r.to_string(),
                                fmt_point(&s.x),
                                fmt_point(&s.y),
                                fmt_f(s.kernel),
                                fmt_f(0.0),
                                fmt_f((r as f64 * mu).powf((c.n as f64 - 2.0) / 2.0)),
                                fmt_f(s.ratio),
                            ]);
                        }
                        v.at_most(format!("max |K_R|/(Rμ)^((n-2)/2), n={} R={r} μ={mu}", c.n), rep.max_ratio, c.max_ratio);
                        pts.push(((r as f64).ln(), rep.max_ratio.ln()));
                    }
                    Err(e) => v.error(format!("size bound R={r} μ={mu}"), e),
                }
            }
            if pts.len() >= 2 {
                let slope = least_squares_slope(&pts);
                v.at_most(format!("|R-trend slope| of the kernel size ratio, μ={mu}"), slope.abs(), c.slope_window);
                derived.insert(format!("size_bound_mu{mu}"), json!({ "slope": slope }));
            }
        }
    }
    (t, serde_json::Value::Object(derived))
}

// ---------------------------------------------------------------- sphase-check

fn sphase_check(p: &SphaseCheckParams, v: &mut Verdicts) -> (Table, serde_json::Value) {
    let mut t = Table::new(&["problem", "m", "lambda", "exact_re", "exact_im", "approx_re", "approx_im", "remainder", "floor"]);
    let k = p.lambda_points;
    let lambdas: Vec<f64> = (0..k)
        .map(|i| (p.lambda_min.ln() + (p.lambda_max / p.lambda_min).ln() * i as f64 / (k - 1) as f64).exp())
        .collect();
    let cubic = cubic_problem();
    let mut slopes = serde_json::Map::new();
    for (&m, &margin) in p.orders.iter().zip(&p.slope_margins) {
        match sp_remainder_slope(&cubic, m, 3 * m + 1, &lambdas) {
            Ok(rep) => {
                for q in &rep.points {
                    t.push(vec![
                        "cubic".into(),
                        m.to_string(),
                        fmt_f(q.lambda),
                        fmt_f(q.exact_re),
                        fmt_f(q.exact_im),
                        fmt_f(q.expansion_re),
                        fmt_f(q.expansion_im),
                        fmt_f(q.remainder),
                        fmt_f(q.floor),
                    ]);
                }
                match rep.status {
                    SlopeStatus::Slope(s) => {
                        v.at_most(format!("cubic phase remainder slope + m, m={m}"), s + m as f64, margin);
                        slopes.insert(format!("m{m}"), json!(s));
                    }
                    SlopeStatus::Floor => v.record(false, format!("cubic phase remainder above roundoff floor, m={m}")),
                }
            }
            Err(e) => v.error(format!("cubic remainder m={m}"), e),
        }
    }
    let g = gaussian_problem();
    let a0 = g.amplitude(0.0);
    let mut worst = 0.0f64;
    for &lambda in &p.gaussian_lambdas {
        match sp_expansion(&g, lambda, 1, 4) {
            Ok(e) => {
                let lead = e.terms.iter().find(|q| q.k == 0 && q.j == 0).map(|q| Complex64::new(q.re, q.im));
                let exact = Complex64::from_polar((2.0 * PI / lambda).sqrt() * a0, PI / 4.0);
                let Some(lead) = lead else {
                    v.error(format!("gaussian λ={lambda}"), "expansion has no leading term");
                    continue;
                };
                let rel = (lead - exact).norm() / exact.norm();
                worst = worst.max(rel);
                t.push(vec![
                    "gaussian-leading".into(),
                    "1".into(),
                    fmt_f(lambda),
                    fmt_f(exact.re),
                    fmt_f(exact.im),
                    fmt_f(lead.re),
                    fmt_f(lead.im),
                    fmt_f(rel),
                    fmt_f(0.0),
                ]);
            }
            Err(e) => v.error(format!("gaussian λ={lambda}"), e),
        }
    }
    v.at_most("gaussian phase leading term relative error", worst, p.leading_tol);
    (t, json!({ "slopes": slopes, "gaussian_leading_error": worst }))
}

// ---------------------------------------------------------------- phase-identities

fn phase_identities(p: &PhaseIdentitiesParams, seed: u64, v: &mut Verdicts) -> (Table, serde_json::Value) {
    let mut t = Table::new(&["check", "n", "root", "x", "y", "t", "reference", "value", "error"]);
    let mut derived = serde_json::Map::new();
    for (di, &n) in p.dims.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(37 * di as u64));
        // factorization of ψ'
        let (mut worst, mut used, mut skipped) = (0.0f64, 0usize, 0usize);
        while used < p.samples && skipped < 100 * p.samples {
            let x = ball_point(&mut rng, n, 1.0);
            let y = ball_point(&mut rng, n, 1.0);
            let tt = rng.random_range(0.02..FRAC_PI_2 - 0.02);
            let Ok(g) = phase_geometry(&x, &y) else {
                skipped += 1;
                continue;
            };
            let (Ok(d), Ok(f)) = (psi_prime(tt, &x, &y), psi_prime_factored_from(tt, &g)) else {
                skipped += 1;
                continue;
            };
            worst = worst.max((d - f).abs() / d.abs().max(1.0));
            used += 1;
        }
        t.push(vec![
            "factorization".into(),
            n.to_string(),
            "-".into(),
            "-".into(),
            "-".into(),
            "-".into(),
            used.to_string(),
            skipped.to_string(),
            fmt_f(worst),
        ]);
        v.record(used == p.samples, format!("ψ' factorization drew {} samples, n={n}", p.samples));
        v.at_most(format!("ψ' factorization relative residual, n={n}"), worst, p.factorization_tol);

        for (which, label) in [(CriticalPoint::First, "t1"), (CriticalPoint::Second, "t2")] {
            let (mut curv, mut closed, mut fd) = (0.0f64, 0.0f64, 0.0f64);
            let mut used = 0usize;
            let mut tries = 0usize;
            while used < p.hessian_samples && tries < 1000 * p.hessian_samples {
                tries += 1;
                let x = ball_point(&mut rng, n, 1.0);
                let y = ball_point(&mut rng, n, 1.0);
                if dist(&x, &y) < 0.05 {
                    continue;
                }
                let Ok(g) = phase_geometry(&x, &y) else { continue };
                let Some(root) = g.root(which) else { continue };
                let outer = x.iter().chain(&y).map(|c| c * c).sum::<f64>();
                if root.sin2t < 0.05 || g.d.max(0.0).sqrt() < 0.05 || root.t < 0.02 {
                    continue;
                }
                if which == CriticalPoint::Second && outer < 1.0 {
                    continue;
                }
                let step = 1e-3;
                let f = |k: f64| psi(root.t + k * step, &x, &y);
                let (Ok(a), Ok(b), Ok(c), Ok(d), Ok(e)) = (f(-2.0), f(-1.0), f(0.0), f(1.0), f(2.0)) else { continue };
                let num = (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * step * step);
                let Ok(an) = psi_second(root.t, &x, &y) else { continue };
                let ce = ((num - root.curvature).abs()).max((an - root.curvature).abs()) / root.curvature.abs();
                curv = curv.max(ce);

                let data = match curvature_and_hessian(&x, &y, which) {
                    Ok(d) => d,
                    Err(e) => {
                        v.error(format!("mixed Hessian {label} x={x:?} y={y:?}"), e);
                        continue;
                    }
                };
                let s = root.sin2t;
                let mut expected = vec![-1.0 / s; n - 1];
                expected.push(0.0);
                let err = |spec: &[f64]| spec.iter().zip(&expected).map(|(a, b)| (a - b).abs() * s).fold(0.0, f64::max);
                let ec = err(&data.spectrum).max(data.spectrum_imag * s);
                closed = closed.max(ec);
                let ef = match mixed_hessian_fd(&x, &y, which, p.fd_step) {
                    Ok(h) => {
                        let (sp, im) = spectrum(h);
                        err(&sp).max(im * s)
                    }
                    // the root can leave the admissible set under the perturbation
                    Err(_) => continue,
                };
                fd = fd.max(ef);
                used += 1;
                t.push(vec![
                    "curvature".into(),
                    n.to_string(),
                    label.into(),
                    fmt_point(&x),
                    fmt_point(&y),
                    fmt_f(root.t),
                    fmt_f(root.curvature),
                    fmt_f(num),
                    fmt_f(ce),
                ]);
                t.push(vec![
                    "hessian-spectrum".into(),
                    n.to_string(),
                    label.into(),
                    fmt_point(&x),
                    fmt_point(&y),
                    fmt_f(root.t),
                    fmt_f(-1.0 / s),
                    fmt_point(&data.spectrum),
                    fmt_f(ec.max(ef)),
                ]);
            }
            v.record(used == p.hessian_samples, format!("{} admissible {label} samples, n={n}", p.hessian_samples));
            v.at_most(format!("ψ''({label}) = ±4√D/sin 2t vs finite differences, n={n}"), curv, p.curvature_tol);
            v.at_most(format!("mixed Hessian spectrum at {label}, closed form, n={n}"), closed, p.hessian_closed_tol);
            v.at_most(format!("mixed Hessian spectrum at {label}, finite differences, n={n}"), fd, p.hessian_fd_tol);
            derived.insert(format!("n{n}_{label}"), json!({ "curvature": curv, "closed": closed, "fd": fd }));
        }
        derived.insert(format!("n{n}_factorization"), json!(worst));
    }
    (t, serde_json::Value::Object(derived))
}

// ---------------------------------------------------------------- bounds-table

fn bounds_table(p: &BoundsTableParams, v: &mut Verdicts) -> (Table, serde_json::Value) {
    let mut t = Table::new(&["check", "n", "lambda", "p", "r", "mu", "value", "reference", "branch", "error"]);
    let mut seam = 0.0f64;
    let mut thm12 = 0.0f64;
    let mut l2 = 0.0f64;
    let mut slope = 0.0f64;
    let mut table = 0.0f64;
    let mut jumps = Vec::new();
    let mut rho_shape = true;
    let mut branch_ok = true;

    for &n in &p.dims {
        let th = thresholds(n);
        let nf = n as f64;
        for &lambda in &p.lambdas {
            let floor = lambda.powf(-4.0 / 3.0);
            let mus: Vec<f64> = (0..5).map(|i| (floor.ln() * (1.0 - i as f64 / 4.0)).exp()).collect();
            for &pe in &p.p_values {
                let ip = pe.inv();
                for &mu in &mus {
                    let nu = lambda * (1.0 - mu);
                    let mut q = BoundQuery { n, lambda, r: 1.0, nu, p: pe };
                    // r = (λμ^{1/2})^{-1}
                    // place each seam at the μ actually recovered from ν
                    let mu = mu_params(lambda, 1.0, nu).map(|m| m.0).unwrap_or(mu);
                    q.r = 1.0 / (lambda * mu.sqrt());
                    let mid = if ip >= th.stein_tomas { BoundBranch::MidLowP } else { BoundBranch::MidHighP };
                    if let Ok((m, mt)) = mu_params(lambda, q.r, nu) {
                        let d = (branch_log_value(&q, BoundBranch::SmallBall, m, mt) - branch_log_value(&q, mid, m, mt)).abs();
                        seam = seam.max(d);
                        t.push(row("seam-small", n, lambda, pe, q.r, m, d, 0.0, "SmallBall|Mid", d));
                    }
                    // r = λμ
                    q.r = lambda * mu;
                    if let Ok((m, mt)) = mu_params(lambda, q.r, nu) {
                        let large = select_branch(&BoundQuery { r: q.r * (1.0 + 1e-9), ..q }, m);
                        let d = (branch_log_value(&q, mid, m, mt) - branch_log_value(&q, large, m, mt)).abs();
                        let continuous = ip >= th.kink || (n >= 3 && ip < th.critical);
                        if continuous {
                            seam = seam.max(d);
                            t.push(row("seam-large", n, lambda, pe, q.r, m, d, 0.0, &format!("Mid|{large:?}"), d));
                        } else {
                            jumps.push(d);
                            t.push(row("jump-large", n, lambda, pe, q.r, m, d, 0.0, &format!("Mid|{large:?}"), d));
                        }
                    }
                    // Λ at p = 2 against the three L² formulas
                    if ip == 0.5 {
                        for r_exp in [-0.9, 0.0, 0.9] {
                            let r = lambda.powf(r_exp);
                            if let Ok(b) = lambda_l2(n, lambda, r, nu) {
                                let s = lambda * b.mu.sqrt();
                                let reference = match b.branch {
                                    BoundBranch::SmallBall => s.powf((nf - 2.0) / 2.0) * r.powf(nf / 2.0),
                                    BoundBranch::LargeBelowKink => (lambda / r).powf(-0.25),
                                    _ => (s / r).powf(-0.5),
                                };
                                let e = (b.value / reference - 1.0).abs();
                                l2 = l2.max(e);
                                t.push(row("l2-formula", n, lambda, pe, r, b.mu, b.value, reference, &format!("{:?}", b.branch), e));
                            }
                        }
                    }
                }
                // global exponent at μ = r = 1
                if let Ok(b) = lambda_lp(&BoundQuery { n, lambda, r: 1.0, nu: 0.0, p: pe }) {
                    let reference = lambda.powf(sogge_sigma(n, pe) - 0.5);
                    let e = (b.value / reference - 1.0).abs();
                    thm12 = thm12.max(e);
                    t.push(row("global-exponent", n, lambda, pe, 1.0, 1.0, b.value, reference, &format!("{:?}", b.branch), e));
                }
                // μ^{-1/4} inside the middle branch at r = 1
                if ip == 0.5 && lambda >= 100.0 {
                    let q = BoundQuery { n, lambda, r: 1.0, nu: lambda * 0.5, p: pe };
                    let q2 = BoundQuery { nu: lambda * 0.75, ..q };
                    if let (Ok(a), Ok(b)) = (lambda_lp(&q), lambda_lp(&q2)) {
                        let s = (b.log_value - a.log_value) / (b.mu.ln() - a.mu.ln());
                        let e = (s + 0.25).abs();
                        if a.branch == b.branch {
                            slope = slope.max(e);
                        } else {
                            branch_ok = false;
                        }
                        t.push(row("mu-slope", n, lambda, pe, 1.0, b.mu, s, -0.25, &format!("{:?}", a.branch), e));
                    }
                }
                // maximal bounds over centers
                for &re in &p.r_exponents {
                    let r = lambda.powf(re);
                    let Some(mb) = maximal_local_bound(n, lambda, r, pe) else { continue };
                    match sup_over_centers(n, lambda, r, pe, p.mu_grid) {
                        Ok((sup, mu_star)) => {
                            let e = (sup / mb.value).ln().abs();
                            table = table.max(e);
                            let b = lambda_lp(&BoundQuery { n, lambda, r, nu: lambda * (1.0 - mu_star), p: pe })
                                .map(|b| format!("{:?}", b.branch))
                                .unwrap_or_default();
                            t.push(row("max-table", n, lambda, pe, r, mu_star, sup, mb.value, &format!("{:?}/{b}", mb.column), e));
                        }
                        Err(e) => v.error(format!("sup over centers n={n} λ={lambda} p={pe} r={r}"), e),
                    }
                }
            }
        }
        // σ and ρ across their breakpoints
        let eps = 1e-15;
        let mut points = vec![th.kink];
        if n >= 2 {
            points.push(th.stein_tomas);
        }
        if n >= 3 {
            points.push(th.critical);
        }
        for &ip in &points {
            let (Ok(a), Ok(b)) = (Exponent::from_inverse(ip + eps), Exponent::from_inverse(ip - eps)) else { continue };
            let ds = (sogge_sigma(n, a) - sogge_sigma(n, b)).abs();
            let dr = (kt_rho(n, a) - kt_rho(n, b)).abs();
            seam = seam.max(ds).max(dr);
            t.push(vec![
                "exponent-seam".into(),
                n.to_string(),
                "-".into(),
                fmt_f(1.0 / ip),
                "-".into(),
                "-".into(),
                fmt_f(ds),
                fmt_f(dr),
                "sigma|rho".into(),
                fmt_f(ds.max(dr)),
            ]);
        }
        // ρ decreases in p up to the kink and increases after it
        let grid: Vec<f64> = (0..=200).map(|i| 0.5 * (1.0 - i as f64 / 200.0)).collect();
        for w in grid.windows(2) {
            let (Ok(a), Ok(b)) = (Exponent::from_inverse(w[0]), Exponent::from_inverse(w[1])) else { continue };
            let d = kt_rho(n, b) - kt_rho(n, a);
            let before = w[1] > th.kink;
            let after = w[0] < th.kink;
            if (before && d > 1e-15) || (after && d < -1e-15) {
                rho_shape = false;
            }
        }
        t.push(vec![
            "rho-minimum".into(),
            n.to_string(),
            "-".into(),
            fmt_f(1.0 / th.kink),
            "-".into(),
            "-".into(),
            fmt_f(kt_rho(n, Exponent::from_inverse(th.kink).expect("kink in range"))),
            "-".into(),
            "-".into(),
            "-".into(),
        ]);
    }
    v.at_most("seam continuity of Λ, σ(p), ρ(p) (log scale)", seam, p.seam_tol);
    v.at_most("Λ at μ = r = 1 equals λ^(σ(p)-1/2)", thm12, p.seam_tol);
    v.at_most("Λ at p = 2 matches the L² formulas", l2, p.seam_tol);
    v.at_most("log-slope of Λ in μ within the middle branch + 1/4", slope, p.slope_tol);
    v.record(branch_ok, "μ-slope samples stay in one branch");
    v.record(rho_shape, "ρ(p) decreases before the kink and increases after it");
    v.at_most("sup over centers of Λ vs maximal bound tables (log scale)", table, p.table_tol);
    let jump = max_of(jumps.iter().copied());
    (t, json!({ "seam": seam, "global": thm12, "l2": l2, "mu_slope": slope, "tables": table, "largest_jump_at_r_eq_lambda_mu": jump }))
}

#[allow(clippy::too_many_arguments)]
fn row(check: &str, n: usize, lambda: f64, p: Exponent, r: f64, mu: f64, value: f64, reference: f64, branch: &str, err: f64) -> Vec<String> {
    vec![
        check.into(),
        n.to_string(),
        fmt_f(lambda),
        pname(p),
        fmt_f(r),
        fmt_f(mu),
        fmt_f(value),
        fmt_f(reference),
        branch.into(),
        fmt_f(err),
    ]
}

// ---------------------------------------------------------------- construct

fn construct(p: &ConstructParams, v: &mut Verdicts) -> (Table, serde_json::Value) {
    let mut t = Table::new(&[
        "n",
        "N",
        "j",
        "delta",
        "lambda",
        "x1_star",
        "index_set",
        "selected",
        "bin_fraction",
        "target",
        "median",
        "coherence",
        "transverse_min",
        "transverse_max",
    ]);
    let mut reports = Vec::new();
    for tube in &p.tubes {
        let ctx = format!("tube n={} N={} j={} δ={}", tube.n, tube.big_n, tube.j, tube.delta);
        let spec = match TubeSpec::new(tube.n, tube.big_n, tube.j, tube.delta) {
            Ok(s) => s,
            Err(e) => {
                v.error(&ctx, e);
                continue;
            }
        };
        let rep = match build_concentrated(&spec, p.window, p.bins) {
            Ok(r) => r,
            Err(e) => {
                v.error(&ctx, e);
                continue;
            }
        };
        // h_{α_k}(x_k) / δ^{1/2} on |x_k| <= δ/4 for the transverse axes
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for a in rep.eigenfunction.coefficients().keys() {
            for &ak in &a.0[1..] {
                for x in [0.0, spec.delta / 8.0, spec.delta / 4.0] {
                    let r = hermite_normalized(ak as usize, x).abs() / spec.delta.sqrt();
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
        }
        if tube.n == 1 {
            lo = 1.0;
            hi = 1.0;
        }
        let amp = rep.measured_median_amplitude / rep.target_amplitude;
        v.within(format!("{ctx}: median amplitude / target"), amp, 1.0 / p.amplitude_factor, p.amplitude_factor);
        v.record(rep.selected * p.bins >= rep.parity_class_size, format!("{ctx}: pigeonhole |J| >= |I|/M"));
        v.at_most(format!("{ctx}: phase coherence spread"), rep.coherence_spread, p.coherence_limit);
        v.within(format!("{ctx}: transverse factors / δ^(1/2)"), lo, 0.1, 10.0);
        v.within(format!("{ctx}: transverse factors / δ^(1/2) (max)"), hi, 0.1, 10.0);
        let norm = global_l2_norm(&rep.eigenfunction);
        v.at_most(format!("{ctx}: ||e||_2 = sqrt(|J|)"), (norm - (rep.selected as f64).sqrt()).abs(), 1e-12);
        t.push(vec![
            tube.n.to_string(),
            tube.big_n.to_string(),
            tube.j.to_string(),
            fmt_f(tube.delta),
            fmt_f(spec.lambda),
            fmt_f(spec.x1_star),
            rep.index_set_size.to_string(),
            rep.selected.to_string(),
            fmt_f(rep.bin_fraction),
            fmt_f(rep.target_amplitude),
            fmt_f(rep.measured_median_amplitude),
            fmt_f(rep.coherence_spread),
            fmt_f(lo),
            fmt_f(hi),
        ]);
        reports.push(serde_json::to_value(&rep).unwrap_or_default());
    }
    (t, json!({ "reports": reports }))
}

// ---------------------------------------------------------------- saturate

fn saturate(p: &SaturateParams, seed: u64, v: &mut Verdicts) -> (Table, serde_json::Value) {
    let mut t = Table::new(&["case", "n", "N", "lambda", "j", "delta", "nu", "r", "p", "measured", "Lambda", "ratio", "branch"]);
    let mut derived = serde_json::Map::new();
    // (case, p) -> [(λ, ratio)]
    let mut sweeps: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut at_two: Vec<f64> = Vec::new();

    if let Some(c) = &p.case2 {
        for pe in &p.p_values {
            let mut pts = Vec::new();
            for &big_n in &c.big_n {
                let ctx = format!("case 2 n={} N={big_n} p={pe}", c.n);
                let res = (|| -> crate::Result<_> {
                    let space = EigenSpace::new(c.n, big_n)?;
                    let lambda = space.lambda();
                    let x1 = lambda - lambda * 4f64.powi(-(c.j as i32));
                    let r = lambda.powf(c.r_exponent);
                    let (mu, _) = mu_params(lambda, r, x1)?;
                    let lo = 1.0 / (lambda * mu.sqrt());
                    if !(r > lo && r < lambda * mu) {
                        return Err(crate::Error::Infeasible(format!("r = {r} outside ((λμ^½)^-1, λμ) = ({lo}, {})", lambda * mu)));
                    }
                    let delta = (lambda * mu.sqrt() / r).powf(-0.5);
                    let tube = TubeSpec::new(c.n, big_n, c.j, delta)?;
                    let rep = build_concentrated(&tube, crate::construct::DEFAULT_WINDOW, crate::construct::DEFAULT_BINS)?;
                    let nu = tube.center();
                    let s = saturation_ratio(&rep, &nu, r, *pe)?;
                    Ok((lambda, delta, x1, r, s))
                })();
                match res {
                    Ok((lambda, delta, x1, r, s)) => {
                        t.push(vec![
                            "case2".into(),
                            c.n.to_string(),
                            big_n.to_string(),
                            fmt_f(lambda),
                            c.j.to_string(),
                            fmt_f(delta),
                            fmt_f(x1),
                            fmt_f(r),
                            pname(*pe),
                            fmt_f(s.measured),
                            fmt_f(s.bound.value),
                            fmt_f(s.ratio),
                            format!("{:?}", s.bound.branch),
                        ]);
                        pts.push((lambda, s.ratio));
                        if pe.inv() == 0.5 {
                            at_two.push(s.ratio);
                        }
                    }
                    Err(e) => v.error(ctx, e),
                }
            }
            sweeps.push((format!("case 2, p={pe}"), pts));
        }
    }
    if let Some(c) = &p.case3 {
        for pe in &p.p_values {
            let mut pts = Vec::new();
            for &big_n in &c.big_n {
                let res = (|| -> crate::Result<_> {
                    let space = EigenSpace::new(1, big_n)?;
                    let lambda = space.lambda();
                    let r = lambda.powf(c.r_exponent);
                    let nu = lambda - r / 2.0;
                    let e = Eigenfunction::basis(space, MultiIndex(vec![big_n as u32]))?;
                    Ok((lambda, nu, r, measure_ratio(&e, &[nu], r, *pe, None, seed)?))
                })();
                match res {
                    Ok((lambda, nu, r, s)) => {
                        t.push(vec![
                            "case3".into(),
                            "1".into(),
                            big_n.to_string(),
                            fmt_f(lambda),
                            "-".into(),
                            "-".into(),
                            fmt_f(nu),
                            fmt_f(r),
                            pname(*pe),
                            fmt_f(s.measured),
                            fmt_f(s.bound.value),
                            fmt_f(s.ratio),
                            format!("{:?}", s.bound.branch),
                        ]);
                        pts.push((lambda, s.ratio));
                        if pe.inv() == 0.5 {
                            at_two.push(s.ratio);
                        }
                    }
                    Err(e) => v.error(format!("case 3 N={big_n} p={pe}"), e),
                }
            }
            sweeps.push((format!("case 3, p={pe}"), pts));
        }
    }
    let mut all: Vec<f64> = Vec::new();
    for (name, pts) in &sweeps {
        if pts.len() < 2 {
            v.record(false, format!("{name}: at least two sweep points"));
            continue;
        }
        let hi = pts.iter().map(|q| q.1).fold(0.0f64, f64::max);
        let lo = pts.iter().map(|q| q.1).fold(f64::INFINITY, f64::min);
        let fit: Vec<(f64, f64)> = pts.iter().map(|q| (q.0.ln(), q.1.ln())).collect();
        let slope = least_squares_slope(&fit);
        v.at_most(format!("{name}: band max/min of ratio"), hi / lo, p.band_ratio);
        v.at_most(format!("{name}: |λ-trend slope| of ratio"), slope.abs(), p.slope_window);
        derived.insert(name.clone(), json!({ "min": lo, "max": hi, "slope": slope }));
        all.extend(pts.iter().map(|q| q.1));
    }

    if let Some(c) = &p.random {
        let mut sorted = at_two.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.is_empty() {
            v.record(false, "upper-bound check needs p = 2 sweep ratios");
        } else {
            let median = sorted[sorted.len() / 2];
            let c_upper = c.upper_factor * median;
            let mut worst = max_of(all.iter().copied());
            for &big_n in &c.big_n {
                let res = (|| -> crate::Result<Vec<f64>> {
                    let space = EigenSpace::new(c.n, big_n)?;
                    let lambda = space.lambda();
                    let r = lambda.powf(c.r_exponent);
                    let bound = lambda_l2(c.n, lambda, r, 0.0)?;
                    let gram = BoxGram::new(&vec![big_n as usize; c.n], &vec![0.0; c.n], r)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(big_n));
                    // coefficients drawn in sequence so the stream does not depend on threads
                    let fs = (0..c.count).map(|_| Eigenfunction::random(space, &mut rng)).collect::<crate::Result<Vec<_>>>()?;
                    fs.par_iter()
                        .map(|e| Ok(gram.norm_sq(e)?.max(0.0).sqrt() / global_l2_norm(e) / bound.value))
                        .collect()
                })();
                match res {
                    Ok(ratios) => {
                        let top = max_of(ratios.iter().copied());
                        worst = worst.max(top);
                        let space = EigenSpace::new(c.n, big_n).expect("validated above");
                        let lambda = space.lambda();
                        for (i, q) in ratios.iter().enumerate() {
                            t.push(vec![
                                format!("random-{i}"),
                                c.n.to_string(),
                                big_n.to_string(),
                                fmt_f(lambda),
                                "-".into(),
                                "-".into(),
                                fmt_f(0.0),
                                fmt_f(lambda.powf(c.r_exponent)),
                                "2".into(),
                                "-".into(),
                                "-".into(),
                                fmt_f(*q),
                                "cube".into(),
                            ]);
                        }
                    }
                    Err(e) => v.error(format!("random eigenfunctions N={big_n}"), e),
                }
            }
            v.at_most(format!("largest ratio over sweeps and random eigenfunctions <= C_upper = {c_upper:.4}"), worst, c_upper);
            derived.insert("c_upper".into(), json!(c_upper));
            derived.insert("sweep_median".into(), json!(median));
            derived.insert("largest_ratio".into(), json!(worst));
        }
    }
    (t, serde_json::Value::Object(derived))
}
