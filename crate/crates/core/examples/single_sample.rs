//! Refine a perturbed dictionary from one sample and compare each step's loss
//! ratio against the predicted factor (1 - 2 eta |x|^2)^2.

use ccr::generative::{perturb_dictionary, sample_sparse_code, synthesize_sample, GenerativeParams};
use ccr::linalg::random_orthonormal;
use ccr::optimizer::{run_single_sample, support_radius_bound, Mode, RefinementConfig};
use ccr::Seed;

fn main() -> ccr::Result<()> {
    let p = GenerativeParams::new(10, 8, 5, 0.5, 1.0)?;
    let rho = support_radius_bound(&p);
    let seed = Seed(3);
    let dstar = random_orthonormal(10, 8, seed.derive(0))?;
    let dinit = perturb_dictionary(&dstar, rho, seed.derive(1))?;
    let sample = synthesize_sample(&dstar, &sample_sparse_code(&p, seed.derive(2))?)?;

    let eta = 1e-2;
    let cfg = RefinementConfig::new(eta, rho, 200, p.k, Mode::Single)?.with_model(p);
    let traj = run_single_sample(&dstar, &dinit, &sample, &cfg)?;
    let tau = 1.0 - 2.0 * eta * sample.x.norm_squared();
    println!("rho={rho:.5} predicted loss ratio={:.6}", tau * tau);
    for r in traj.records.iter().step_by(20) {
        println!("iter {:>3}  loss {:.3e}  ratio {:.6}  dev_active {:.4}", r.iter, r.loss, r.contraction, r.dev_active);
    }
    Ok(())
}
