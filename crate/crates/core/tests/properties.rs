use ccr::classifier::{concept_dispersion, normalize_and_project};
use ccr::estimator::{loss_closed_form, loss_top_k};
use ccr::generative::{perturb_dictionary, sample_sparse_code, synthesize_sample, GenerativeParams};
use ccr::linalg::{random_orthonormal, Dictionary, Matrix};
use ccr::optimizer::{
    auxiliary_targets, ccr_step, check_b_invariant, grad_active_columns, run_single_sample,
    support_radius_bound, Mode, RefinementConfig,
};
use ccr::selection::{hard_threshold, l0_norm, top_k_support};
use ccr::Seed;
use proptest::prelude::*;

fn instance(seed: u64, rho: f64) -> (Dictionary, Dictionary, ccr::generative::Sample, GenerativeParams) {
    let p = GenerativeParams::new(10, 8, 5, 0.5, 1.0).unwrap();
    let s = Seed(seed);
    let dstar = random_orthonormal(10, 8, s.derive(0)).unwrap();
    let dinit = perturb_dictionary(&dstar, rho, s.derive(1)).unwrap();
    let sample = synthesize_sample(&dstar, &sample_sparse_code(&p, s.derive(2)).unwrap()).unwrap();
    (dstar, dinit, sample, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_stays_in_ball_and_freezes_inactive(seed in 0u64..10_000, rho in 0.0f64..0.3, eta in 1e-3f64..0.5) {
        let (_, dinit, sample, _) = instance(seed, rho.max(1e-3));
        let dict = perturb_dictionary(&dinit, rho, Seed(seed).derive(9)).unwrap();
        let support = top_k_support(&dict, &sample.x, 5).unwrap();
        let g = grad_active_columns(&dict, &sample, &support).unwrap();
        let cfg = RefinementConfig::new(eta, rho, 1, 5, Mode::Single).unwrap();
        let next = ccr_step(&dict, &dinit, &g, &cfg).unwrap();
        for i in 0..8 {
            prop_assert!((next.column(i) - dinit.column(i)).norm() <= rho * (1.0 + 1e-12) + 1e-15);
            if !support.contains(i) {
                prop_assert_eq!(next.column(i), dict.column(i));
            }
        }
    }

    #[test]
    fn single_sample_loss_never_grows(seed in 0u64..10_000) {
        let p = GenerativeParams::new(10, 8, 5, 0.5, 1.0).unwrap();
        let rho = support_radius_bound(&p);
        let (dstar, dinit, sample, _) = instance(seed, rho);
        let cfg = RefinementConfig::new(1e-2, rho, 60, 5, Mode::Single).unwrap();
        let traj = run_single_sample(&dstar, &dinit, &sample, &cfg).unwrap();
        for w in traj.records.windows(2) {
            prop_assert!(w[1].loss <= w[0].loss * (1.0 + 1e-9) + 1e-28);
        }
    }

    #[test]
    fn unconstrained_dynamics_keep_target_offset_along_x(seed in 0u64..10_000, iters in 1usize..40) {
        let (dstar, dinit, sample, _) = instance(seed, 0.02);
        let targets = auxiliary_targets(&dinit, &sample).unwrap();
        let cfg = RefinementConfig::new(1e-2, 10.0, iters, 5, Mode::Single).unwrap();
        let traj = run_single_sample(&dstar, &dinit, &sample, &cfg).unwrap();
        prop_assert!(check_b_invariant(&dinit, &targets, &sample));
        prop_assert!(check_b_invariant(&traj.final_dictionary, &targets, &sample));
    }

    #[test]
    fn closed_form_loss_nonnegative_and_zero_at_truth(seed in 0u64..10_000, rho in 0.0f64..0.5) {
        let (dstar, dinit, sample, _) = instance(seed, rho);
        prop_assert!(loss_top_k(&dinit, &dstar, &sample.x, 5).unwrap().value >= 0.0);
        prop_assert!(loss_closed_form(&dstar, &dstar, &sample.x, &sample.support).unwrap().value <= 1e-24);
    }

    #[test]
    fn projection_lands_on_capped_sphere(seed in 0u64..10_000, rho in 0.0f64..1.0, spread in 0.0f64..3.0) {
        let d0 = random_orthonormal(6, 5, Seed(seed)).unwrap();
        let noise = random_orthonormal(6, 5, Seed(seed).derive(1)).unwrap();
        let raw = d0.matrix() * 1.3 + noise.matrix() * spread;
        let dict = Dictionary::new(raw).unwrap();
        let once = normalize_and_project(&dict, &d0, rho).unwrap();
        prop_assert!(once.has_unit_columns(1e-12));
        for i in 0..5 {
            prop_assert!((once.column(i) - d0.column(i)).norm() <= rho);
        }
        let twice = normalize_and_project(&once, &d0, rho).unwrap();
        prop_assert!((twice.matrix() - once.matrix()).amax() <= 1e-12);
    }

    #[test]
    fn dispersion_never_shrinks_angles(seed in 0u64..10_000, r in 1.0f64..4.0) {
        let base = random_orthonormal(8, 1, Seed(seed)).unwrap().column(0);
        let noise = random_orthonormal(8, 6, Seed(seed).derive(1)).unwrap();
        let mut m = Matrix::zeros(8, 6);
        for j in 0..6 {
            m.set_column(j, &(&base + noise.column(j) * 0.4));
        }
        let dict = Dictionary::normalized(m).unwrap();
        let mean = dict.matrix().column_mean().normalize();
        let out = concept_dispersion(&dict, r).unwrap();
        prop_assert!(out.has_unit_columns(1e-12));
        for j in 0..6 {
            let before = dict.column(j).dot(&mean).clamp(-1.0, 1.0).acos();
            let after = out.column(j).dot(&mean).clamp(-1.0, 1.0).acos();
            prop_assert!(after + 1e-12 >= before);
            prop_assert!(after <= std::f64::consts::FRAC_PI_2 + 1e-12 || before >= std::f64::consts::FRAC_PI_2);
        }
    }

    #[test]
    fn threshold_sparsity_monotone(v in proptest::collection::vec(-2.0f64..2.0, 1..30), a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let v = ccr::Vector::from_vec(v);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(l0_norm(&hard_threshold(&v, hi)) <= l0_norm(&hard_threshold(&v, lo)));
    }
}
