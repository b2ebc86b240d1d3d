//! An eigenfunction concentrated on a tube by phase binning, and the ratio of
//! its local L² norm to the local bound.

use hermite_lp::construct::{build_concentrated, saturation_ratio, TubeSpec, DEFAULT_BINS, DEFAULT_WINDOW};
use hermite_lp::bounds::Exponent;

fn main() -> hermite_lp::Result<()> {
    let big_n = 800;
    let lambda = ((2 * big_n + 2) as f64).sqrt();
    let r = lambda.sqrt();
    let delta = lambda.powf(-0.25);
    let tube = TubeSpec::new(2, big_n, 0, delta)?;
    let rep = build_concentrated(&tube, DEFAULT_WINDOW, DEFAULT_BINS)?;
    println!("λ = {lambda:.4}, δ = {delta:.4}, tube half sizes {:.4} × {:.4}", tube.half_length(), tube.half_width());
    println!(
        "|I| = {}, parity class {}, |J| = {} (bin {}, fraction {:.3})",
        rep.index_set_size, rep.parity_class_size, rep.selected, rep.bin_index, rep.bin_fraction
    );
    println!(
        "median |e|/||e|| on the tube {:.4e}, target {:.4e}, phase spread {:.3}",
        rep.measured_median_amplitude, rep.target_amplitude, rep.coherence_spread
    );
    let s = saturation_ratio(&rep, &tube.center(), r, Exponent::TWO)?;
    println!("local L² / global = {:.4e}, Λ = {:.4e} ({:?}), ratio {:.4}", s.measured, s.bound.value, s.bound.branch, s.ratio);
    Ok(())
}
