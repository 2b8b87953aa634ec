//! Rotating column pairs of an orthonormal dictionary by theta keeps it
//! orthonormal but costs at least the predicted loss floor.

use ccr::estimator::loss_closed_form;
use ccr::generative::{
    adversarial_eps_max, adversarial_floor, build_adversarial_dictionary, sample_code_on_support,
    synthesize_sample, theta_for_chord, GenerativeParams,
};
use ccr::linalg::random_orthonormal;
use ccr::selection::SupportSet;
use ccr::Seed;

fn main() -> ccr::Result<()> {
    let (k, gamma, gmax) = (4, 0.5, 1.0);
    let p = GenerativeParams::new(10, 6, k, gamma, gmax)?;
    let dstar = random_orthonormal(10, 6, Seed(5))?;
    let support = SupportSet::prefix(k);
    let eps_max = adversarial_eps_max(gamma, gmax);
    println!("eps_max={eps_max:.4}");
    for eps in [0.05, 0.1, 0.2] {
        let theta = theta_for_chord(eps);
        let dt = build_adversarial_dictionary(&dstar, k, theta)?;
        let mut worst = f64::INFINITY;
        for t in 0..100 {
            let s = synthesize_sample(&dstar, &sample_code_on_support(&p, &support, Seed(6).derive(t))?)?;
            worst = worst.min(loss_closed_form(&dt, &dstar, &s.x, &support)?.value);
        }
        println!("eps {eps:.2}  theta {theta:.4}  floor {:.3e}  min loss {worst:.3e}", adversarial_floor(k, eps, gamma));
    }
    Ok(())
}
