//! Samplers for the sparse generative model `x = D* β`, initial-dictionary
//! perturbation, Gaussian query realizations, and the paired-rotation
//! adversarial dictionary.

use std::f64::consts::FRAC_PI_2;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{check_len, Dictionary, Matrix, Vector};
use crate::rng::Seed;
use crate::selection::SupportSet;

/// Parameters of the sparse generative model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerativeParams {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    /// Lower magnitude bound γ on nonzero code entries.
    pub gamma: f64,
    /// Upper magnitude bound Γ on nonzero code entries.
    pub gamma_max: f64,
    /// Per-nonzero second moment, `(γ² + γΓ + Γ²)/3`.
    pub sigma2: f64,
    /// Attach Rademacher signs to nonzero entries (zero-mean law).
    pub signs: bool,
}

impl GenerativeParams {
    pub fn new(d: usize, n: usize, k: usize, gamma: f64, gamma_max: f64) -> Result<Self> {
        if k == 0 || k > n || n > d {
            return Err(Error::InvalidParams(format!(
                "need 1 <= k <= n <= d, got d={d} n={n} k={k}"
            )));
        }
        if !(gamma > 0.0 && gamma <= gamma_max && gamma_max.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "need 0 < gamma <= Gamma, got gamma={gamma} Gamma={gamma_max}"
            )));
        }
        let sigma2 = (gamma * gamma + gamma * gamma_max + gamma_max * gamma_max) / 3.0;
        Ok(Self { d, n, k, gamma, gamma_max, sigma2, signs: true })
    }

    pub fn with_signs(mut self, signs: bool) -> Self {
        self.signs = signs;
        self
    }

    fn magnitude<R: Rng>(&self, rng: &mut R) -> f64 {
        let u = if self.gamma == self.gamma_max {
            self.gamma
        } else {
            rng.random_range(self.gamma..=self.gamma_max)
        };
        if self.signs && rng.random_bool(0.5) {
            -u
        } else {
            u
        }
    }
}

/// A sparse code `β` with its support `S*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    pub beta: Vector,
    pub support: SupportSet,
}

/// A synthesized input `x = D* β`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vector,
    pub beta: Vector,
    pub support: SupportSet,
}

/// One Gaussian draw of the query model: `y = ⟨x, z⟩`, `r = D*ᵀ z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRealization {
    pub z: Vector,
    pub y: f64,
    pub r: Vector,
}

/// Samples `β` with a uniformly random k-subset support.
pub fn sample_sparse_code(p: &GenerativeParams, seed: Seed) -> Result<SparseCode> {
    if p.k == 0 || p.k > p.n {
        return Err(Error::InvalidParams(format!("k={} must lie in [1, n={}]", p.k, p.n)));
    }
    let mut rng = seed.rng();
    let mut idx = index::sample(&mut rng, p.n, p.k).into_vec();
    idx.sort_unstable();
    let mut beta = Vector::zeros(p.n);
    for &i in &idx {
        beta[i] = p.magnitude(&mut rng);
    }
    Ok(SparseCode { beta, support: SupportSet::from_sorted(idx) })
}

/// Samples `β` supported exactly on `support` (used where the support is fixed,
/// e.g. `S* = [k]` in the adversarial construction).
pub fn sample_code_on_support(
    p: &GenerativeParams,
    support: &SupportSet,
    seed: Seed,
) -> Result<SparseCode> {
    let mut rng = seed.rng();
    let mut beta = Vector::zeros(p.n);
    for &i in support.indices() {
        if i >= p.n {
            return Err(Error::IndexOutOfRange { index: i, len: p.n });
        }
        beta[i] = p.magnitude(&mut rng);
    }
    Ok(SparseCode { beta, support: support.clone() })
}

pub fn synthesize_sample(dstar: &Dictionary, code: &SparseCode) -> Result<Sample> {
    check_len(dstar.n_atoms(), code.beta.len())?;
    if code.support.is_empty() {
        return Err(Error::InvalidParams("sparse code has empty support".into()));
    }
    let x = dstar.matrix() * &code.beta;
    Ok(Sample { x, beta: code.beta.clone(), support: code.support.clone() })
}

/// Convenience: `m` samples whose codes use seeds `seed.derive(h)`.
pub fn sample_batch(
    dstar: &Dictionary,
    p: &GenerativeParams,
    m: usize,
    seed: Seed,
) -> Result<Vec<Sample>> {
    (0..m)
        .map(|h| synthesize_sample(dstar, &sample_sparse_code(p, seed.derive(h as u64))?))
        .collect()
}

/// Uniform sample from the `d`-ball of radius `rho`.
pub(crate) fn uniform_ball<R: Rng>(rng: &mut R, d: usize, rho: f64) -> Vector {
    loop {
        let dir = Vector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let norm = dir.norm();
        if norm > 0.0 {
            let u: f64 = rng.random();
            let radius = rho * u.powf(1.0 / d as f64);
            return dir * (radius / norm);
        }
    }
}

/// `D^init = D* + E`, each column of `E` uniform in the ρ-ball.
pub fn perturb_dictionary(dstar: &Dictionary, rho: f64, seed: Seed) -> Result<Dictionary> {
    if rho < 0.0 {
        return Err(Error::NegativeRadius(rho));
    }
    if rho == 0.0 {
        return Ok(dstar.clone());
    }
    let mut rng = seed.rng();
    let mut mat = dstar.matrix().clone();
    for mut col in mat.column_iter_mut() {
        col += uniform_ball(&mut rng, dstar.dim(), rho);
    }
    Dictionary::new(mat)
}

pub fn sample_query_realization(
    dstar: &Dictionary,
    x: &Vector,
    seed: Seed,
) -> Result<QueryRealization> {
    check_len(dstar.dim(), x.len())?;
    let mut rng = seed.rng();
    let z = Vector::from_fn(dstar.dim(), |_, _| StandardNormal.sample(&mut rng));
    let y = x.dot(&z);
    let r = dstar.matrix().tr_mul(&z);
    Ok(QueryRealization { z, y, r })
}

/// Rotates column pairs `(i, i + k/2)` of `D*` by `theta` within their span.
///
/// `S*` is taken to be the first `k` columns. Odd `k` rotates only the first
/// `k − 1` columns.
pub fn build_adversarial_dictionary(dstar: &Dictionary, k: usize, theta: f64) -> Result<Dictionary> {
    if !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    if k > dstar.n_atoms() {
        return Err(Error::InvalidParams(format!("k={k} exceeds n={}", dstar.n_atoms())));
    }
    let half = k / 2;
    let (s, c) = theta.sin_cos();
    let src = dstar.matrix();
    let mut out: Matrix = src.clone();
    for i in 0..half {
        let a = src.column(i);
        let b = src.column(i + half);
        out.set_column(i, &(a * c + b * s));
        out.set_column(i + half, &(a * -s + b * c));
    }
    Dictionary::new(out)
}

/// Largest admissible deviation `1/√(1 + 16Γ²/γ²)` for the lower-bound construction.
pub fn adversarial_eps_max(gamma: f64, gamma_max: f64) -> f64 {
    1.0 / (1.0 + 16.0 * gamma_max * gamma_max / (gamma * gamma)).sqrt()
}

/// Rotation angle whose chord length is `eps`: `eps = 2 sin(θ/2)`.
pub fn theta_for_chord(eps: f64) -> f64 {
    2.0 * (eps / 2.0).asin()
}

/// Lower bound `81 (k − 1) ε² γ² / 200` on the adversarial loss.
pub fn adversarial_floor(k: usize, eps: f64, gamma: f64) -> f64 {
    81.0 * (k.saturating_sub(1)) as f64 * eps * eps * gamma * gamma / 200.0
}
