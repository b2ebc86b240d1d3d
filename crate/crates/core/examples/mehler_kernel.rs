//! Kernel values from the Mehler contour quadrature, the spectral sum and
//! the stationary phase model at a few point pairs.

use hermite_lp::mehler::{kernel_quadrature, stationary_phase_model, KernelQuery};
use hermite_lp::spectral::projection_kernel_direct;

fn main() -> hermite_lp::Result<()> {
    let cases: Vec<(usize, u64, Vec<f64>, Vec<f64>)> = vec![
        (1, 21, vec![0.3], vec![-0.2]),
        (1, 81, vec![0.5], vec![0.45]),
        (1, 161, vec![-0.4], vec![0.1]),
        (2, 102, vec![0.3, 0.1], vec![0.2, -0.1]),
        (2, 402, vec![0.6, 0.0], vec![0.58, 0.03]),
        (3, 23, vec![0.5, 0.1, 0.2], vec![0.3, -0.2, 0.1]),
    ];
    println!("{:>2} {:>4} {:>16} {:>10} {:>16} {:>12}", "n", "R", "quadrature", "imag", "spectral sum", "sp model");
    for (n, r, x, y) in cases {
        let lambda = (r as f64).sqrt();
        let q = KernelQuery::new(n, r, x.clone(), y.clone())?;
        let v = kernel_quadrature(&q, 1e-10)?;
        let xs: Vec<f64> = x.iter().map(|c| c * lambda).collect();
        let ys: Vec<f64> = y.iter().map(|c| c * lambda).collect();
        let d = projection_kernel_direct(n, r, &xs, &ys)?;
        let m = stationary_phase_model(&q)?;
        println!("{n:>2} {r:>4} {:>16.12} {:>10.1e} {:>16.12} {:>12.6}", v.re, v.im, d, m.re);
    }
    Ok(())
}
