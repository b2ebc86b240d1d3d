//! Local L^p norms on balls and cubes by tensor grids, Monte Carlo, and the
//! closed-form Gram matrix.

use hermite_lp::bounds::Exponent;
use hermite_lp::normquad::{box_l2_gram, local_lp_norm, Quadrature, Region, Shape};
use hermite_lp::spectral::{EigenSpace, Eigenfunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hermite_lp::Result<()> {
    let space = EigenSpace::new(2, 60)?;
    let lambda = space.lambda();
    let e = Eigenfunction::random(space, &mut ChaCha8Rng::seed_from_u64(5))?;
    let center = vec![3.0, -2.0];
    let half = 1.5;

    let cube = Region::cube(center.clone(), half).resolved_for(lambda, 2.0);
    let grid = local_lp_norm(&e, &cube, Exponent::TWO)?;
    let gram = box_l2_gram(&e, &center, half)?.sqrt();
    println!("cube L²: tensor grid {:.10}, Gram {:.10} ({} nodes)", grid.value, gram, grid.nodes);

    let ball = Region::ball(center.clone(), half).resolved_for(lambda, 2.0);
    for p in [Exponent::TWO, Exponent::finite(4.0)?, Exponent::INFINITY] {
        println!("ball L^{p}: {:.8}", local_lp_norm(&e, &ball, p)?.value);
    }
    let mc = Region::new(Shape::Ball, center, half, Quadrature::MonteCarlo { samples: 200_000, seed: 9 });
    let m = local_lp_norm(&e, &mc, Exponent::TWO)?;
    println!("ball L² by Monte Carlo: {:.6} ± {:.1e}", m.value, m.error.unwrap_or(f64::NAN));
    Ok(())
}
