//! Closed-form expected query loss against a Monte-Carlo estimate.

use ccr::estimator::{loss_monte_carlo, loss_top_k};
use ccr::generative::{perturb_dictionary, sample_sparse_code, synthesize_sample, GenerativeParams};
use ccr::linalg::random_orthonormal;
use ccr::Seed;

fn main() -> ccr::Result<()> {
    let p = GenerativeParams::new(10, 8, 5, 0.5, 1.0)?;
    let dstar = random_orthonormal(10, 8, Seed(1))?;
    let dict = perturb_dictionary(&dstar, 0.1, Seed(2))?;
    let s = synthesize_sample(&dstar, &sample_sparse_code(&p, Seed(3))?)?;
    let exact = loss_top_k(&dict, &dstar, &s.x, 5)?;
    for trials in [1_000, 10_000, 100_000] {
        let mc = loss_monte_carlo(&dict, &dstar, &s.x, 5, trials, Seed(4))?;
        println!("trials {trials:>6}  mc {:.5e} +- {:.1e}  closed form {:.5e}", mc.mean, mc.std_error(), exact.value);
    }
    Ok(())
}
