//! Remainder of the stationary phase expansion against adaptive quadrature.

use hermite_lp::sphase::{cubic_problem, gaussian_problem, sp_remainder_slope, SlopeStatus};

fn main() -> hermite_lp::Result<()> {
    let lambdas: Vec<f64> = (0..9).map(|i| 10f64.powf(2.0 + 0.25 * i as f64)).collect();
    for (name, p) in [("cubic", cubic_problem()), ("gaussian", gaussian_problem())] {
        for m in [1, 2] {
            let r = sp_remainder_slope(&p, m, 3 * m + 1, &lambdas)?;
            println!("{name} m={m}");
            for q in &r.points {
                println!("  lambda={:>10.1} remainder={:.3e} floor={:.1e}", q.lambda, q.remainder, q.floor);
            }
            match r.status {
                SlopeStatus::Slope(s) => println!("  slope {s:.3}"),
                SlopeStatus::Floor => println!("  at roundoff floor"),
            }
        }
    }
    Ok(())
}
