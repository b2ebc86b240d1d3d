//! Enumerating an eigenspace and evaluating its spectral projection kernel
//! by direct summation.

use hermite_lp::spectral::{enumerate_eigenspace, projection_kernel_direct, EigenSpace, Eigenfunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hermite_lp::Result<()> {
    let space = EigenSpace::new(2, 40)?;
    let indices = enumerate_eigenspace(space)?;
    println!("n = 2, N = 40: λ² = {}, multiplicity {} (enumerated {})", space.lambda_sq(), space.multiplicity(), indices.len());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let e = Eigenfunction::random(space, &mut rng)?;
    println!("random eigenfunction: ||e||_2 = {:.6}, e(0.3, -1.2) = {:.6}", e.global_l2_norm(), e.eval(&[0.3, -1.2])?);

    // K(x, x) sums the squares of an orthonormal basis
    let r = space.lambda_sq();
    for x in [[0.0, 0.0], [2.0, 1.0], [5.0, 5.0]] {
        println!("Π(x, x) at {x:?} = {:.8}", projection_kernel_direct(2, r, &x, &x)?);
    }
    Ok(())
}
