//! Multi-sample refinement: with n = d the dictionary is recovered, with n < d
//! the loss still vanishes but the columns stay away from the truth.

use ccr::generative::{perturb_dictionary, sample_batch, GenerativeParams};
use ccr::linalg::random_orthonormal;
use ccr::optimizer::{multi_contraction_factor, run_multi_sample, Mode, RefinementConfig};
use ccr::Seed;

fn run(n: usize) -> ccr::Result<()> {
    let p = GenerativeParams::new(10, n, 5, 0.5, 1.0)?;
    let seed = Seed(11);
    let dstar = random_orthonormal(10, n, seed.derive(0))?;
    let dinit = perturb_dictionary(&dstar, 0.027, seed.derive(1))?;
    let samples = sample_batch(&dstar, &p, 2000, seed.derive(2))?;
    let cfg = RefinementConfig::new(0.1, 0.027, 300, 5, Mode::Multi)?;
    let traj = run_multi_sample(&dstar, &dinit, &samples, &cfg)?;
    let last = traj.records.last().unwrap();
    println!(
        "n={n:>2}  tau={:.5}  final loss {:.2e}  dev_all {:.2e}",
        multi_contraction_factor(&p, 0.1),
        last.loss,
        last.dev_all
    );
    Ok(())
}

fn main() -> ccr::Result<()> {
    run(10)?;
    run(8)
}
