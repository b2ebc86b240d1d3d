//! Critical points of the kernel phase, their curvature, and the spectrum of
//! the mixed Hessian of the critical value.

use hermite_lp::phase::{curvature_and_hessian, mixed_hessian_fd, phase_geometry, spectrum, CriticalPoint};

fn main() -> hermite_lp::Result<()> {
    let x = [0.7, 0.3, 0.0];
    let y = [0.6, 0.5, 0.1];
    let g = phase_geometry(&x, &y)?;
    println!("|x-y| = {:.6}, D = {:.6}", g.dist, g.d);
    for which in [CriticalPoint::First, CriticalPoint::Second] {
        let Some(root) = g.root(which) else {
            println!("{which:?}: no critical point");
            continue;
        };
        let data = curvature_and_hessian(&x, &y, which)?;
        let (fd, _) = spectrum(mixed_hessian_fd(&x, &y, which, 1e-5)?);
        println!(
            "{which:?}: t = {:.8}, ψ'' = {:.8}, -1/sin 2t = {:.8}",
            root.t,
            root.curvature,
            -1.0 / root.sin2t
        );
        println!("  spectrum closed form {:?}", data.spectrum);
        println!("  spectrum finite diff {fd:?}");
    }
    Ok(())
}
