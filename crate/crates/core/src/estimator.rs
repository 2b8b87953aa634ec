//! Predictors and population losses for the Gaussian query model.
//!
//! For a column-orthogonal ground truth `D*`, the squared population loss of
//! the top-k predictor `Σ_{i∈S} ⟨d_i, x⟩ r_i` has the closed form
//! `‖D*_S D_Sᵀ x − x‖²`. [`loss_monte_carlo`] estimates the same expectation
//! by sampling `z ~ N(0, I)` and serves as an independent check.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::generative::Sample;
use crate::linalg::{check_len, check_shape, Dictionary, Vector};
use crate::rng::Seed;
use crate::selection::{top_k_support, SupportSet};

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub value: f64,
    pub support_used: SupportSet,
}

/// `Σ_{i∈S} ⟨d_i, x⟩ r_i`.
pub fn mle_predict(dict: &Dictionary, x: &Vector, r: &Vector, support: &SupportSet) -> Result<f64> {
    check_len(dict.dim(), x.len())?;
    check_len(dict.n_atoms(), r.len())?;
    support.check_range(dict.n_atoms())?;
    Ok(support
        .indices()
        .iter()
        .map(|&i| dict.matrix().column(i).dot(x) * r[i])
        .sum())
}

/// `‖D*_S D_Sᵀ x − x‖²` for an explicitly supplied support `S`.
pub fn loss_closed_form(
    dict: &Dictionary,
    dstar: &Dictionary,
    x: &Vector,
    support: &SupportSet,
) -> Result<LossReport> {
    check_shape(dict, dstar)?;
    check_len(dict.dim(), x.len())?;
    support.check_range(dict.n_atoms())?;
    let mut residual = -x;
    for &i in support.indices() {
        let c = dict.matrix().column(i).dot(x);
        residual.axpy(c, &dstar.matrix().column(i), 1.0);
    }
    Ok(LossReport { value: residual.norm_squared(), support_used: support.clone() })
}

/// [`loss_closed_form`] with `S = top_k_support(D, x, k)`.
pub fn loss_top_k(dict: &Dictionary, dstar: &Dictionary, x: &Vector, k: usize) -> Result<LossReport> {
    let support = top_k_support(dict, x, k)?;
    loss_closed_form(dict, dstar, x, &support)
}

/// Mean of per-sample closed-form losses, each with its own top-k support.
pub fn loss_aggregate(
    dict: &Dictionary,
    dstar: &Dictionary,
    samples: &[Sample],
    k: usize,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = 0.0;
    for s in samples {
        total += loss_top_k(dict, dstar, &s.x, k)?.value;
    }
    Ok(total / samples.len() as f64)
}

/// Monte-Carlo estimate of `E_z[(y − f̃)²]` with its sampling spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloLoss {
    pub mean: f64,
    /// Sample standard deviation of the per-trial squared errors.
    pub sample_std: f64,
    pub trials: usize,
}

impl MonteCarloLoss {
    pub fn std_error(&self) -> f64 {
        self.sample_std / (self.trials as f64).sqrt()
    }
}

/// Averages `(⟨x, z⟩ − Σ_{i∈S} ⟨d_i, x⟩ ⟨d*_i, z⟩)²` over `trials` Gaussian draws,
/// `S` from [`top_k_support`].
pub fn loss_monte_carlo(
    dict: &Dictionary,
    dstar: &Dictionary,
    x: &Vector,
    k: usize,
    trials: usize,
    seed: Seed,
) -> Result<MonteCarloLoss> {
    check_shape(dict, dstar)?;
    check_len(dict.dim(), x.len())?;
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be >= 1".into()));
    }
    let support = top_k_support(dict, x, k)?;
    let d = dict.dim();
    let weights: Vec<(f64, Vector)> = support
        .indices()
        .iter()
        .map(|&i| (dict.matrix().column(i).dot(x), dstar.column(i)))
        .collect();

    let mut rng = seed.rng();
    let mut z = Vector::zeros(d);
    // Welford accumulation keeps the variance stable for 10^6+ trials.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for t in 0..trials {
        for zj in z.iter_mut() {
            *zj = StandardNormal.sample(&mut rng);
        }
        let y = x.dot(&z);
        let pred: f64 = weights.iter().map(|(w, v)| w * v.dot(&z)).sum();
        let err = (y - pred) * (y - pred);
        let delta = err - mean;
        mean += delta / (t + 1) as f64;
        m2 += delta * (err - mean);
    }
    let sample_std = if trials > 1 { (m2 / (trials - 1) as f64).sqrt() } else { 0.0 };
    Ok(MonteCarloLoss { mean, sample_std, trials })
}
