//! The local bound Λ(λ, r, ν) across branches, the global exponent σ(p),
//! and the maximal bound over centers.

use hermite_lp::bounds::{
    classify_region, kt_annulus_bound, lambda_lp, maximal_local_bound, mu_params, sup_over_centers, sogge_sigma, thresholds,
    BoundQuery, Exponent,
};

fn main() -> hermite_lp::Result<()> {
    let (lambda, n) = (1e4, 2);
    let th = thresholds(n);
    println!("n = {n}: kink p = {:.4}, Stein–Tomas p = {:.4}", 1.0 / th.kink, 1.0 / th.stein_tomas);

    let (mu, mu_t) = mu_params(10.0, 1.0, 9.0)?;
    println!("λ = 10, r = 1, ν = 9: μ = {mu}, μ̃ = {mu_t:.6}");

    println!("{:>6} {:>10} {:>10} {:>14} {:>24}", "p", "r", "ν/λ", "Λ", "branch");
    for p in [Exponent::TWO, Exponent::finite(4.0)?, Exponent::INFINITY] {
        for (r, nu) in [(1e-5, 0.0), (1.0, 0.999 * lambda), (100.0, 0.5 * lambda), (5e3, 0.9 * lambda)] {
            let b = lambda_lp(&BoundQuery { n, lambda, r, nu, p })?;
            println!("{:>6} {r:>10.1e} {:>10.4} {:>14.6e} {:>24?}", p.to_string(), nu / lambda, b.value, b.branch);
        }
        println!("  λ^(σ(p)-1/2) = {:.6e}", lambda.powf(sogge_sigma(n, p) - 0.5));
    }

    let p = Exponent::finite(3.0)?;
    for r in [lambda.powf(-0.6), lambda.powf(0.5)] {
        let (sup, at) = sup_over_centers(n, lambda, r, p, 400)?;
        let table = maximal_local_bound(n, lambda, r, p);
        println!("r = {r:.3e}: sup over centers {sup:.6e} at μ = {at:.3e}, table {:?}", table.map(|t| t.value));
    }

    for x in [0.0, 0.9 * lambda, lambda - 1e-3, 1.1 * lambda] {
        let reg = classify_region(lambda, &[x, 0.0]);
        println!("|x| = {x:.3}: {reg:?}, annulus bound at p = 2: {:.4e}", kt_annulus_bound(n, lambda, reg, Exponent::TWO)?);
    }
    Ok(())
}
