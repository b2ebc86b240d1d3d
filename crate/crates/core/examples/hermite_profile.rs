//! Normalized Hermite functions against their Szegő asymptotics, and the
//! Golub–Welsch rule used for orthonormality checks.

use hermite_lp::hermite::{asymptotic_shape, hermite_batch, hermite_function_rule, hermite_normalized, szego_eval, turning_point};

fn main() {
    let k = 100;
    let u = turning_point(k);
    println!("k = {k}, turning point u = {u:.6}");
    println!("{:>10} {:>16} {:>16} {:>14}", "x", "h_k(x)", "shape", "regime");
    for x in [0.0, 0.25 * u, 0.5 * u, 0.9 * u, u - u.powf(-1.0 / 3.0), u, u + 1.0, 1.2 * u] {
        let h = hermite_normalized(k, x);
        let shape = asymptotic_shape(k, x).map(|s| format!("{s:16.10}")).unwrap_or_else(|| format!("{:>16}", "-"));
        println!("{x:>10.4} {h:>16.10} {shape} {:>14?}", szego_eval(k, x).tag);
    }

    // Gram matrix entries under the m-point rule
    let (nodes, weights) = hermite_function_rule(128);
    let rows: Vec<Vec<f64>> = nodes.iter().map(|&x| hermite_batch(100, x)).collect();
    let gram = |j: usize, l: usize| -> f64 { rows.iter().zip(&weights).map(|(h, w)| w * h[j] * h[l]).sum() };
    println!("<h_0,h_0> - 1 = {:.2e}", gram(0, 0) - 1.0);
    println!("<h_100,h_100> - 1 = {:.2e}", gram(100, 100) - 1.0);
    println!("<h_37,h_99> = {:.2e}", gram(37, 99));
}
