//! Greedy IP-OMP selection next to plain top-k correlation. The two agree on
//! orthonormal dictionaries and can differ once columns correlate.

use ccr::linalg::{random_orthonormal, Dictionary, Matrix, Vector};
use ccr::selection::{ip_omp_select, top_k_support};
use ccr::Seed;
use rand_distr::{Distribution, StandardNormal};

fn main() -> ccr::Result<()> {
    let mut rng = Seed(8).rng();
    let x = Vector::from_fn(12, |_, _| StandardNormal.sample(&mut rng));

    let orth = random_orthonormal(12, 10, Seed(9))?;
    println!("orthonormal  ip-omp {:?}  top-k {:?}", ip_omp_select(&orth, &x, 3)?, top_k_support(&orth, &x, 3)?.indices());

    let g = Matrix::from_fn(12, 10, |_, _| StandardNormal.sample(&mut rng));
    let skew = Dictionary::normalized(g)?;
    println!("correlated   ip-omp {:?}  top-k {:?}", ip_omp_select(&skew, &x, 3)?, top_k_support(&skew, &x, 3)?.indices());
    Ok(())
}
