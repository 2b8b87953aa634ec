//! Constrained concept refinement by projected gradient descent.
//!
//! Each iteration recomputes the top-k support of every sample, takes a
//! gradient step on the frozen-support squared loss, and projects every
//! column back into the ρ-ball around its initial value. The drivers record a
//! [`StepRecord`] per iterate, including iteration 0.

use std::collections::BTreeSet;

use log::warn;
use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::estimator::loss_closed_form;
use crate::generative::{GenerativeParams, Sample};
use crate::linalg::{check_len, check_shape, project_to_ball, Dictionary, Matrix, Vector};
use crate::selection::{top_k_support, SupportSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Single,
    Multi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementConfig {
    /// Step size η.
    pub eta: f64,
    /// Correction radius ρ.
    pub rho: f64,
    /// Number of iterations T.
    pub iters: usize,
    /// Sparsity k.
    pub k: usize,
    pub mode: Mode,
    /// Fail instead of warn when a convergence precondition does not hold.
    pub strict: bool,
    /// Model parameters used for precondition checks, when known.
    pub model: Option<GenerativeParams>,
}

impl RefinementConfig {
    pub fn new(eta: f64, rho: f64, iters: usize, k: usize, mode: Mode) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParams(format!("eta must be > 0, got {eta}")));
        }
        if rho < 0.0 || !rho.is_finite() {
            return Err(Error::NegativeRadius(rho));
        }
        if iters == 0 {
            return Err(Error::InvalidParams("iters must be >= 1".into()));
        }
        Ok(Self { eta, rho, iters, k, mode, strict: false, model: None })
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn with_model(mut self, model: GenerativeParams) -> Self {
        self.model = Some(model);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub iter: usize,
    pub loss: f64,
    /// `‖D^(t) − D*‖_{1,2}`.
    pub dev_all: f64,
    /// Max column deviation over columns activated at any iterate so far.
    pub dev_active: f64,
    /// `loss(t) / loss(t−1)`; 0 at iteration 0 or when the previous loss is 0.
    pub contraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub final_dictionary: Dictionary,
}

/// Column `i ∈ S` is `2(⟨d_i, x⟩ − β_i) x`; all other columns are zero.
pub fn grad_active_columns(dict: &Dictionary, sample: &Sample, support: &SupportSet) -> Result<Matrix> {
    check_len(dict.dim(), sample.x.len())?;
    check_len(dict.n_atoms(), sample.beta.len())?;
    support.check_range(dict.n_atoms())?;
    let mut grads = Matrix::zeros(dict.dim(), dict.n_atoms());
    for &i in support.indices() {
        let r = dict.matrix().column(i).dot(&sample.x) - sample.beta[i];
        grads.set_column(i, &(&sample.x * (2.0 * r)));
    }
    Ok(grads)
}

/// Per column: `d ← Proj_{‖d − d^init‖ ≤ ρ}(d − η g)`.
pub fn ccr_step(
    dict: &Dictionary,
    dinit: &Dictionary,
    grads: &Matrix,
    cfg: &RefinementConfig,
) -> Result<Dictionary> {
    check_shape(dict, dinit)?;
    check_len(dict.dim(), grads.nrows())?;
    check_len(dict.n_atoms(), grads.ncols())?;
    let mut out = dict.matrix().clone();
    for i in 0..dict.n_atoms() {
        let half = dict.matrix().column(i) - grads.column(i) * cfg.eta;
        let projected = project_to_ball(&half, &dinit.column(i), cfg.rho)?;
        out.set_column(i, &projected);
    }
    Dictionary::new(out)
}

fn precondition_violations_single(
    dstar: &Dictionary,
    dinit: &Dictionary,
    sample: &Sample,
    cfg: &RefinementConfig,
) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let init_dev = dinit.deviation(dstar)?;
    if init_dev > cfg.rho * (1.0 + 1e-12) {
        out.push(format!("initial deviation {init_dev:.6} exceeds rho {}", cfg.rho));
    }
    let x2 = sample.x.norm_squared();
    if cfg.mode == Mode::Single && cfg.eta >= 1.0 / (2.0 * x2) {
        out.push(format!("eta {} not below 1/(2‖x‖²) = {:.6}", cfg.eta, 1.0 / (2.0 * x2)));
    }
    if let Some(p) = &cfg.model {
        let bound = support_radius_bound(p);
        if cfg.rho > bound {
            out.push(format!("rho {} exceeds gamma/(8 sqrt(k) Gamma) = {bound:.6}", cfg.rho));
        }
    }
    Ok(out)
}

/// `γ / (8 √k Γ)`.
pub fn support_radius_bound(p: &GenerativeParams) -> f64 {
    p.gamma / (8.0 * (p.k as f64).sqrt() * p.gamma_max)
}

/// `(k − 1) / (128 k σ²)`.
pub fn multi_step_bound(p: &GenerativeParams) -> f64 {
    (p.k as f64 - 1.0) / (128.0 * p.k as f64 * p.sigma2)
}

/// `√(1 − k(k−1)σ²η / (2n²))`.
pub fn multi_contraction_factor(p: &GenerativeParams, eta: f64) -> f64 {
    let (k, n) = (p.k as f64, p.n as f64);
    (1.0 - k * (k - 1.0) * p.sigma2 * eta / (2.0 * n * n)).sqrt()
}

fn enforce(violations: Vec<String>, strict: bool) -> Result<()> {
    if violations.is_empty() {
        return Ok(());
    }
    if strict {
        return Err(Error::Precondition(violations.join("; ")));
    }
    for v in violations {
        warn!("precondition not met: {v}");
    }
    Ok(())
}

struct Recorder {
    records: Vec<StepRecord>,
    activated: BTreeSet<usize>,
}

impl Recorder {
    fn new(iters: usize) -> Self {
        Self { records: Vec::with_capacity(iters + 1), activated: BTreeSet::new() }
    }

    fn push(
        &mut self,
        iter: usize,
        loss: f64,
        dict: &Dictionary,
        dstar: &Dictionary,
        supports: &[SupportSet],
    ) -> Result<()> {
        for s in supports {
            self.activated.extend(s.indices().iter().copied());
        }
        let diff = dict.matrix() - dstar.matrix();
        let dev_all = diff.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
        let dev_active = self
            .activated
            .iter()
            .map(|&i| diff.column(i).norm())
            .fold(0.0, f64::max);
        let contraction = match self.records.last() {
            Some(prev) if prev.loss > 0.0 => loss / prev.loss,
            _ => 0.0,
        };
        self.records.push(StepRecord { iter, loss, dev_all, dev_active, contraction });
        Ok(())
    }
}

/// Single-input refinement. Every step asserts that the recovered support is
/// the true support `S*`.
pub fn run_single_sample(
    dstar: &Dictionary,
    dinit: &Dictionary,
    sample: &Sample,
    cfg: &RefinementConfig,
) -> Result<Trajectory> {
    check_shape(dstar, dinit)?;
    check_len(dstar.dim(), sample.x.len())?;
    enforce(precondition_violations_single(dstar, dinit, sample, cfg)?, cfg.strict)?;

    let mut dict = dinit.clone();
    let mut rec = Recorder::new(cfg.iters);
    for t in 0..=cfg.iters {
        let support = top_k_support(&dict, &sample.x, cfg.k)?;
        let loss = loss_closed_form(&dict, dstar, &sample.x, &support)?.value;
        rec.push(t, loss, &dict, dstar, std::slice::from_ref(&support))?;
        if t == cfg.iters {
            break;
        }
        if support != sample.support {
            return Err(Error::SupportMismatch { iter: t, sample: 0 });
        }
        let grads = grad_active_columns(&dict, sample, &support)?;
        dict = ccr_step(&dict, dinit, &grads, cfg)?;
    }
    Ok(Trajectory { records: rec.records, final_dictionary: dict })
}

/// Fixed-order pairwise sum of `Σ coef_h · x^h`.
fn pairwise_sum(terms: &[(f64, &Vector)], dim: usize) -> Vector {
    const BLOCK: usize = 32;
    if terms.len() <= BLOCK {
        let mut acc = Vector::zeros(dim);
        for (c, x) in terms {
            acc.axpy(*c, *x, 1.0);
        }
        return acc;
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid], dim) + pairwise_sum(&terms[mid..], dim)
}

/// Multi-sample refinement on the aggregated loss
/// `(1/m) Σ_h ‖D*_{S^h} D_{S^h}ᵀ x^h − x^h‖²`.
pub fn run_multi_sample(
    dstar: &Dictionary,
    dinit: &Dictionary,
    samples: &[Sample],
    cfg: &RefinementConfig,
) -> Result<Trajectory> {
    check_shape(dstar, dinit)?;
    let Some(first) = samples.first() else {
        return Err(Error::EmptyInput);
    };
    for s in samples {
        check_len(dstar.dim(), s.x.len())?;
        check_len(dstar.n_atoms(), s.beta.len())?;
    }
    let mut violations = precondition_violations_single(dstar, dinit, first, cfg)?;
    if let Some(p) = &cfg.model {
        if cfg.eta > multi_step_bound(p) {
            violations.push(format!(
                "eta {} exceeds (k-1)/(128 k sigma^2) = {:.6}",
                cfg.eta,
                multi_step_bound(p)
            ));
        }
    }
    enforce(violations, cfg.strict)?;

    let (d, n) = (dstar.dim(), dstar.n_atoms());
    let m = samples.len() as f64;
    let mut dict = dinit.clone();
    let mut rec = Recorder::new(cfg.iters);
    for t in 0..=cfg.iters {
        let supports: Vec<SupportSet> = samples
            .iter()
            .map(|s| top_k_support(&dict, &s.x, cfg.k))
            .collect::<Result<_>>()?;
        let mut total = 0.0;
        for (s, sup) in samples.iter().zip(&supports) {
            total += loss_closed_form(&dict, dstar, &s.x, sup)?.value;
        }
        rec.push(t, total / m, &dict, dstar, &supports)?;
        if t == cfg.iters {
            break;
        }
        if let Some(h) = samples.iter().zip(&supports).position(|(s, sup)| *sup != s.support) {
            return Err(Error::SupportMismatch { iter: t, sample: h });
        }
        let mut grads = Matrix::zeros(d, n);
        for i in 0..n {
            let col = dict.matrix().column(i);
            let terms: Vec<(f64, &Vector)> = samples
                .iter()
                .zip(&supports)
                .filter(|(_, sup)| sup.contains(i))
                .map(|(s, _)| (2.0 * (col.dot(&s.x) - s.beta[i]) / m, &s.x))
                .collect();
            if !terms.is_empty() {
                grads.set_column(i, &pairwise_sum(&terms, d));
            }
        }
        dict = ccr_step(&dict, dinit, &grads, cfg)?;
    }
    Ok(Trajectory { records: rec.records, final_dictionary: dict })
}

/// `d̂ = d^(0) + ((β_i − xᵀd^(0)) / ‖x‖²) x`, the point nearest `d^(0)` with
/// `xᵀd̂ = β_i`.
pub fn auxiliary_target(dinit_col: &Vector, x: &Vector, beta_i: f64) -> Result<Vector> {
    check_len(dinit_col.len(), x.len())?;
    let x2 = x.norm_squared();
    if x2 == 0.0 {
        return Err(Error::ZeroInput);
    }
    Ok(dinit_col + x * ((beta_i - x.dot(dinit_col)) / x2))
}

/// Target matrix: `d̂_i` for `i ∈ S*`, `d_i^(0)` elsewhere.
pub fn auxiliary_targets(dinit: &Dictionary, sample: &Sample) -> Result<Matrix> {
    let mut out = dinit.matrix().clone();
    for &i in sample.support.indices() {
        out.set_column(i, &auxiliary_target(&dinit.column(i), &sample.x, sample.beta[i])?);
    }
    Ok(out)
}

/// True iff `d̂_i − d_i = ((β_i − xᵀd_i)/‖x‖²) x` within 1e−9 for every `i ∈ S*`.
pub fn check_b_invariant(dict: &Dictionary, targets: &Matrix, sample: &Sample) -> bool {
    let x2 = sample.x.norm_squared();
    if x2 == 0.0 || targets.shape() != dict.matrix().shape() {
        return false;
    }
    sample.support.indices().iter().all(|&i| {
        let d = dict.matrix().column(i);
        let lhs = targets.column(i) - d;
        let rhs = &sample.x * ((sample.beta[i] - sample.x.dot(&d)) / x2);
        (lhs - rhs).norm() <= 1e-9
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationSpectra {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `|Q_i|`, the number of samples whose true support contains `i`.
    pub q_size: usize,
}

/// Extreme eigenvalues of `(1/m) Σ_{h∈Q_i} β^h β^hᵀ`, `m = samples.len()`.
pub fn activation_spectra(samples: &[Sample], i: usize) -> Result<ActivationSpectra> {
    let Some(first) = samples.first() else {
        return Ok(ActivationSpectra { sigma_min: 0.0, sigma_max: 0.0, q_size: 0 });
    };
    let n = first.beta.len();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let mut cov = Matrix::zeros(n, n);
    let mut q_size = 0;
    for s in samples.iter().filter(|s| s.support.contains(i)) {
        check_len(n, s.beta.len())?;
        cov.ger(1.0, &s.beta, &s.beta, 1.0);
        q_size += 1;
    }
    if q_size == 0 {
        return Ok(ActivationSpectra { sigma_min: 0.0, sigma_max: 0.0, q_size: 0 });
    }
    cov /= samples.len() as f64;
    let eig = SymmetricEigen::new(cov).eigenvalues;
    Ok(ActivationSpectra { sigma_min: eig.min(), sigma_max: eig.max(), q_size })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::loss_aggregate;
    use crate::generative::{perturb_dictionary, sample_batch, sample_sparse_code, synthesize_sample};
    use crate::linalg::random_orthonormal;
    use crate::rng::Seed;

    fn vec(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    struct Instance {
        params: GenerativeParams,
        dstar: Dictionary,
        dinit: Dictionary,
        sample: Sample,
    }

    fn instance(seed: u64, rho: f64) -> Instance {
        let params = GenerativeParams::new(10, 8, 5, 0.5, 1.0).unwrap();
        let dstar = random_orthonormal(10, 8, Seed(seed).derive(0)).unwrap();
        let dinit = perturb_dictionary(&dstar, rho, Seed(seed).derive(1)).unwrap();
        let code = sample_sparse_code(&params, Seed(seed).derive(2)).unwrap();
        let sample = synthesize_sample(&dstar, &code).unwrap();
        Instance { params, dstar, dinit, sample }
    }

    fn one_column(d: &[f64]) -> Dictionary {
        Dictionary::new(Matrix::from_column_slice(d.len(), 1, d)).unwrap()
    }

    #[test]
    fn gradient_examples() {
        let dict = one_column(&[1.0, 0.0]);
        let sample = Sample {
            x: vec(&[2.0, 0.0]),
            beta: vec(&[1.0]),
            support: SupportSet::prefix(1),
        };
        let g = grad_active_columns(&dict, &sample, &SupportSet::prefix(1)).unwrap();
        assert_eq!(g.column(0).into_owned(), vec(&[4.0, 0.0]));

        let stationary = Sample { beta: vec(&[2.0]), ..sample.clone() };
        let g = grad_active_columns(&dict, &stationary, &SupportSet::prefix(1)).unwrap();
        assert_eq!(g.norm(), 0.0);

        let g = grad_active_columns(&dict, &sample, &SupportSet::empty()).unwrap();
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..10 {
            let inst = instance(seed, 0.05);
            let s = &inst.sample.support;
            let g = grad_active_columns(&inst.dinit, &inst.sample, s).unwrap();
            let h = 1e-6;
            for &i in s.indices() {
                for r in 0..inst.params.d {
                    let mut plus = inst.dinit.matrix().clone();
                    let mut minus = plus.clone();
                    plus[(r, i)] += h;
                    minus[(r, i)] -= h;
                    let lp = loss_closed_form(&Dictionary::new(plus).unwrap(), &inst.dstar, &inst.sample.x, s)
                        .unwrap()
                        .value;
                    let lm = loss_closed_form(&Dictionary::new(minus).unwrap(), &inst.dstar, &inst.sample.x, s)
                        .unwrap()
                        .value;
                    let fd = (lp - lm) / (2.0 * h);
                    let an = g[(r, i)];
                    let scale = an.abs().max(1e-3);
                    assert!((fd - an).abs() / scale <= 1e-5, "fd {fd} vs {an}");
                }
            }
        }
    }

    #[test]
    fn multi_gradient_matches_finite_differences() {
        let inst = instance(3, 0.02);
        let samples = crate::generative::sample_batch(&inst.dstar, &inst.params, 40, Seed(9)).unwrap();
        // One unprojected step recovers the gradient as (D0 - D1) / eta.
        let eta = 1e-3;
        let cfg = RefinementConfig::new(eta, 1e3, 1, 5, Mode::Multi).unwrap();
        let traj = run_multi_sample(&inst.dstar, &inst.dinit, &samples, &cfg).unwrap();
        let g = (inst.dinit.matrix() - traj.final_dictionary.matrix()) / eta;
        let h = 1e-6;
        for i in 0..inst.params.n {
            for r in 0..inst.params.d {
                let mut plus = inst.dinit.matrix().clone();
                let mut minus = plus.clone();
                plus[(r, i)] += h;
                minus[(r, i)] -= h;
                let lp = crate::estimator::loss_aggregate(&Dictionary::new(plus).unwrap(), &inst.dstar, &samples, 5).unwrap();
                let lm = crate::estimator::loss_aggregate(&Dictionary::new(minus).unwrap(), &inst.dstar, &samples, 5).unwrap();
                let fd = (lp - lm) / (2.0 * h);
                assert!((fd - g[(r, i)]).abs() <= 1e-6 * g[(r, i)].abs().max(1e-3), "fd {fd} vs {}", g[(r, i)]);
            }
        }
    }

    #[test]
    fn step_examples() {
        let cfg = RefinementConfig::new(0.1, 1.0, 1, 1, Mode::Single).unwrap();
        let dict = one_column(&[1.0, 0.0]);
        let g = Matrix::from_column_slice(2, 1, &[8.0, 0.0]);
        let out = ccr_step(&dict, &dict, &g, &cfg).unwrap();
        assert!((out.column(0) - vec(&[0.2, 0.0])).norm() < 1e-15);

        let zero = Matrix::zeros(2, 1);
        assert_eq!(ccr_step(&dict, &dict, &zero, &cfg).unwrap(), dict);

        let cfg = RefinementConfig::new(1.0, 0.5, 1, 1, Mode::Single).unwrap();
        let out = ccr_step(&dict, &dict, &g, &cfg).unwrap();
        assert!(((out.column(0) - dict.column(0)).norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(RefinementConfig::new(0.0, 0.1, 1, 1, Mode::Single).is_err());
        assert!(RefinementConfig::new(0.1, -0.1, 1, 1, Mode::Single).is_err());
        assert!(RefinementConfig::new(0.1, 0.1, 0, 1, Mode::Single).is_err());
    }

    #[test]
    fn single_sample_at_ground_truth_stays_zero() {
        let inst = instance(1, 0.0);
        let cfg = RefinementConfig::new(1e-2, 0.0, 50, 5, Mode::Single).unwrap();
        let traj = run_single_sample(&inst.dstar, &inst.dstar, &inst.sample, &cfg).unwrap();
        assert_eq!(traj.records.len(), 51);
        assert!(traj.records.iter().all(|r| r.loss < 1e-28));
    }

    #[test]
    fn single_sample_contracts_each_step() {
        let rho = 0.027;
        for seed in 0..10 {
            let inst = instance(seed, rho);
            let cfg = RefinementConfig::new(1e-2, rho, 200, 5, Mode::Single)
                .unwrap()
                .with_model(inst.params)
                .strict(true);
            let traj = run_single_sample(&inst.dstar, &inst.dinit, &inst.sample, &cfg).unwrap();
            let tau = 1.0 - 2.0 * cfg.eta * inst.sample.x.norm_squared();
            for w in traj.records.windows(2) {
                // Ratios are only resolvable above the rounding floor of the loss.
                if w[0].loss > 1e-12 {
                    assert!(w[1].loss <= tau * tau * w[0].loss * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn single_sample_critical_step_hits_zero() {
        let inst = instance(4, 0.027);
        let eta = 1.0 / (2.0 * inst.sample.x.norm_squared());
        let cfg = RefinementConfig::new(eta, 0.027, 3, 5, Mode::Single).unwrap();
        let traj = run_single_sample(&inst.dstar, &inst.dinit, &inst.sample, &cfg).unwrap();
        assert!(traj.records[0].loss > 1e-6);
        assert!(traj.records[1].loss < 1e-25, "{}", traj.records[1].loss);
    }

    #[test]
    fn single_sample_leaves_inactive_columns_and_stays_feasible() {
        let rho = 0.027;
        let inst = instance(7, rho);
        let cfg = RefinementConfig::new(1e-2, rho, 100, 5, Mode::Single).unwrap();
        let traj = run_single_sample(&inst.dstar, &inst.dinit, &inst.sample, &cfg).unwrap();
        let fin = &traj.final_dictionary;
        for i in 0..inst.params.n {
            if !inst.sample.support.contains(i) {
                let a: Vec<u64> = fin.column(i).iter().map(|v| v.to_bits()).collect();
                let b: Vec<u64> = inst.dinit.column(i).iter().map(|v| v.to_bits()).collect();
                assert_eq!(a, b);
            }
        }
        assert!(fin.deviation(&inst.dinit).unwrap() <= rho + 1e-12);
    }

    #[test]
    fn single_support_mismatch_reports_iteration() {
        // Swap two columns of D*: the recovered support differs from S* immediately
        // whenever S* contains exactly one of them.
        let inst = instance(2, 0.0);
        let s = inst.sample.support.indices();
        let inside = s[0];
        let outside = (0..8).find(|i| !inst.sample.support.contains(*i)).unwrap();
        let mut m = inst.dstar.matrix().clone();
        m.swap_columns(inside, outside);
        let bad = Dictionary::new(m).unwrap();
        let cfg = RefinementConfig::new(1e-2, 0.0, 5, 5, Mode::Single).unwrap();
        let err = run_single_sample(&inst.dstar, &bad, &inst.sample, &cfg).unwrap_err();
        assert!(matches!(err, Error::SupportMismatch { iter: 0, sample: 0 }));
    }

    #[test]
    fn strict_mode_rejects_large_radius() {
        let inst = instance(3, 0.2);
        let cfg = RefinementConfig::new(1e-2, 0.2, 5, 5, Mode::Single)
            .unwrap()
            .with_model(inst.params)
            .strict(true);
        let err = run_single_sample(&inst.dstar, &inst.dinit, &inst.sample, &cfg).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn auxiliary_target_examples() {
        let d0 = vec(&[1.0, 0.0]);
        let x = vec(&[2.0, 0.0]);
        assert!((auxiliary_target(&d0, &x, 1.0).unwrap() - vec(&[0.5, 0.0])).norm() < 1e-15);
        assert_eq!(auxiliary_target(&d0, &x, 2.0).unwrap(), d0);
        assert!(auxiliary_target(&d0, &Vector::zeros(2), 1.0).is_err());
        let inst = instance(5, 0.1);
        for &i in inst.sample.support.indices() {
            let t = auxiliary_target(&inst.dinit.column(i), &inst.sample.x, inst.sample.beta[i]).unwrap();
            assert!((inst.sample.x.dot(&t) - inst.sample.beta[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn b_invariant_along_trajectory() {
        let rho = 0.027;
        let inst = instance(6, rho);
        let cfg = RefinementConfig::new(1e-2, rho, 1, 5, Mode::Single).unwrap();
        let targets = auxiliary_targets(&inst.dinit, &inst.sample).unwrap();
        let mut dict = inst.dinit.clone();
        assert!(check_b_invariant(&dict, &targets, &inst.sample));
        let tau = 1.0 - 2.0 * cfg.eta * inst.sample.x.norm_squared();
        for _ in 0..100 {
            let g = grad_active_columns(&dict, &inst.sample, &inst.sample.support).unwrap();
            let half = Dictionary::new(dict.matrix() - &g * cfg.eta).unwrap();
            let next = ccr_step(&dict, &inst.dinit, &g, &cfg).unwrap();
            for &i in inst.sample.support.indices() {
                let t = targets.column(i);
                let before = (dict.matrix().column(i) - t).norm();
                let mid = (half.matrix().column(i) - t).norm();
                let after = (next.matrix().column(i) - t).norm();
                assert!(after <= mid + 1e-15);
                assert!(mid <= tau * before + 1e-15);
            }
            dict = next;
            assert!(check_b_invariant(&dict, &targets, &inst.sample));
        }
        // Off-trajectory perturbation breaks the invariant.
        let kicked = perturb_dictionary(&dict, 0.01, Seed(99)).unwrap();
        assert!(!check_b_invariant(&kicked, &targets, &inst.sample));
    }

    #[test]
    fn multi_with_one_sample_matches_single() {
        let rho = 0.027;
        let inst = instance(8, rho);
        let single = RefinementConfig::new(1e-2, rho, 40, 5, Mode::Single).unwrap();
        let multi = RefinementConfig { mode: Mode::Multi, ..single.clone() };
        let a = run_single_sample(&inst.dstar, &inst.dinit, &inst.sample, &single).unwrap();
        let b = run_multi_sample(&inst.dstar, &inst.dinit, std::slice::from_ref(&inst.sample), &multi)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multi_loss_matches_aggregate() {
        let rho = 0.027;
        let params = GenerativeParams::new(10, 10, 5, 0.5, 1.0).unwrap();
        let dstar = random_orthonormal(10, 10, Seed(1)).unwrap();
        let dinit = perturb_dictionary(&dstar, rho, Seed(2)).unwrap();
        let samples = sample_batch(&dstar, &params, 200, Seed(3)).unwrap();
        let cfg = RefinementConfig::new(0.1, rho, 20, 5, Mode::Multi).unwrap();
        let traj = run_multi_sample(&dstar, &dinit, &samples, &cfg).unwrap();
        let direct = loss_aggregate(&traj.final_dictionary, &dstar, &samples, 5).unwrap();
        assert_eq!(traj.records.last().unwrap().loss, direct);
        assert!(traj.records.windows(2).all(|w| w[1].dev_all < w[0].dev_all));
    }

    #[test]
    fn spectra_empty_and_bounds() {
        let s = activation_spectra(&[], 0).unwrap();
        assert_eq!(s, ActivationSpectra { sigma_min: 0.0, sigma_max: 0.0, q_size: 0 });

        let params = GenerativeParams::new(10, 10, 5, 0.5, 1.0).unwrap();
        let dstar = random_orthonormal(10, 10, Seed(4)).unwrap();
        let samples = sample_batch(&dstar, &params, 2000, Seed(5)).unwrap();
        let s = activation_spectra(&samples, 3).unwrap();
        assert!(s.sigma_min > 0.0 && s.sigma_min <= s.sigma_max);
        let expected_q = samples.iter().filter(|x| x.support.contains(3)).count();
        assert_eq!(s.q_size, expected_q);
        assert!(activation_spectra(&samples, 10).is_err());
    }
}
