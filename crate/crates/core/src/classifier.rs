//! Interpretable classification over precomputed embeddings.
//!
//! Inputs are encoded as hard-thresholded concept activations
//! `s = HT_λ(Dᵀx)` and classified by a linear head. Training refines the concept
//! bank by gradient steps through the kept activations, then renormalizes each
//! column and pulls it back onto the spherical cap of chord radius `ρ` around
//! its initial value.

use std::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{check_len, Dictionary, Matrix, Vector};
use crate::rng::Seed;
use crate::selection::{hard_threshold, l0_norm};

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptBank {
    pub names: Vec<String>,
    pub dict: Dictionary,
    /// Snapshot the projection step measures against.
    pub dinit: Dictionary,
}

impl ConceptBank {
    /// Normalizes the columns of `mat`; [`ConceptBank::dinit`] starts equal to it.
    pub fn new(names: Vec<String>, mat: Matrix) -> Result<Self> {
        check_len(mat.ncols(), names.len())?;
        let dict = Dictionary::normalized(mat)?;
        Ok(Self { names, dinit: dict.clone(), dict })
    }

    pub fn n_concepts(&self) -> usize {
        self.dict.n_atoms()
    }

    pub fn dim(&self) -> usize {
        self.dict.dim()
    }

    /// Applies [`concept_dispersion`] and resets the snapshot to the result.
    pub fn dispersed(&self, r: f64) -> Result<Self> {
        let dict = concept_dispersion(&self.dict, r)?;
        Ok(Self { names: self.names.clone(), dinit: dict.clone(), dict })
    }

    /// `(1/n) Σ ‖d_i − d_i^init‖`.
    pub fn aced(&self) -> f64 {
        let diff = self.dict.matrix() - self.dinit.matrix();
        diff.column_iter().map(|c| c.norm()).sum::<f64>() / self.n_concepts() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDataset {
    /// One sample per row.
    pub x: Matrix,
    pub labels: Vec<usize>,
}

impl EmbeddingDataset {
    /// With `normalize`, every row is scaled to unit norm; zero rows are rejected.
    pub fn new(x: Matrix, labels: Vec<usize>, normalize: bool) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::EmptyDataset);
        }
        check_len(x.nrows(), labels.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embeddings"));
        }
        let mut x = x;
        if normalize {
            for mut row in x.row_iter_mut() {
                let norm = row.norm();
                if norm == 0.0 {
                    return Err(Error::ZeroInput);
                }
                row /= norm;
            }
        }
        Ok(Self { x, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// `max label + 1`.
    pub fn n_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn sample(&self, i: usize) -> Vector {
        self.x.row(i).transpose()
    }

    fn check_labels(&self, classes: usize) -> Result<()> {
        match self.labels.iter().find(|&&l| l >= classes) {
            Some(&label) => Err(Error::LabelOutOfRange { label, classes }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead {
    /// `C x n`.
    pub w: Matrix,
    pub b: Vector,
}

impl LinearHead {
    pub fn zeros(classes: usize, n: usize) -> Self {
        Self { w: Matrix::zeros(classes, n), b: Vector::zeros(classes) }
    }

    /// Weights uniform on `[−1/√n, 1/√n]`, zero bias.
    pub fn random(classes: usize, n: usize, seed: Seed) -> Self {
        let mut rng = seed.rng();
        let a = 1.0 / (n as f64).sqrt();
        let mut w = Matrix::zeros(classes, n);
        for j in 0..n {
            for c in 0..classes {
                w[(c, j)] = rng.random_range(-a..=a);
            }
        }
        Self { w, b: Vector::zeros(classes) }
    }

    pub fn n_classes(&self) -> usize {
        self.w.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub eta_d: f64,
    pub eta_l: f64,
    pub rho: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub batch: usize,
    pub dispersion_r: f64,
    pub seed: Seed,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta_d: 0.0,
            eta_l: 1.0,
            rho: 0.2,
            lambda: 0.1,
            epochs: 50,
            batch: 256,
            dispersion_r: 1.0,
            seed: Seed(0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParams(what.to_string()));
        if !(self.eta_d >= 0.0 && self.eta_d.is_finite()) {
            return bad("eta_d must be >= 0");
        }
        if !(self.eta_l >= 0.0 && self.eta_l.is_finite()) {
            return bad("eta_l must be >= 0");
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::NegativeRadius(self.rho));
        }
        if !(self.lambda >= 0.0) {
            return bad("lambda must be >= 0");
        }
        if self.batch == 0 {
            return bad("batch must be >= 1");
        }
        if !(self.dispersion_r >= 1.0 && self.dispersion_r.is_finite()) {
            return bad("dispersion r must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    /// Mean `‖s‖_0`.
    pub ael: f64,
    /// `ael / n`.
    pub asr: f64,
    pub aced: f64,
    /// Mean cross-entropy.
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    /// Evaluated on the training set after the epoch.
    pub metrics: Metrics,
    /// Largest `‖D − D^init‖_{1,2}` seen after any step of the epoch.
    pub max_deviation: f64,
    /// Largest `|‖d_i‖ − 1|` seen after any step of the epoch.
    pub max_norm_error: f64,
}

/// Scales each column's angle from the normalized mean direction by `r`,
/// capped at π/2. Columns already at or beyond π/2 are left alone.
pub fn concept_dispersion(dict: &Dictionary, r: f64) -> Result<Dictionary> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::InvalidParams(format!("dispersion r must be >= 1, got {r}")));
    }
    let unit = Dictionary::normalized(dict.matrix().clone())?;
    if r == 1.0 {
        return Ok(unit);
    }
    let mean = unit.matrix().column_mean();
    let mean_norm = mean.norm();
    if mean_norm <= 1e-12 {
        return Err(Error::DegenerateBank);
    }
    let dbar = mean / mean_norm;
    let mut out = unit.matrix().clone();
    for i in 0..unit.n_atoms() {
        let d = unit.column(i);
        let c = d.dot(&dbar).clamp(-1.0, 1.0);
        let alpha = c.acos();
        if alpha == 0.0 || alpha >= FRAC_PI_2 {
            continue;
        }
        let tangent = &d - &dbar * c;
        let tn = tangent.norm();
        if tn == 0.0 {
            continue;
        }
        let e = tangent / tn;
        let a = (r * alpha).min(FRAC_PI_2);
        out.set_column(i, &(&dbar * a.cos() + e * a.sin()));
    }
    Dictionary::new(out)
}

/// Normalizes each column, then moves any column farther than `ρ` from its
/// initial value to the nearest point of the unit sphere within `ρ`.
pub fn normalize_and_project(dict: &Dictionary, dinit: &Dictionary, rho: f64) -> Result<Dictionary> {
    crate::linalg::check_shape(dict, dinit)?;
    if rho < 0.0 {
        return Err(Error::NegativeRadius(rho));
    }
    let mut out = dict.matrix().clone();
    for i in 0..dict.n_atoms() {
        let d0 = dinit.column(i);
        let col = dict.column(i);
        let norm = col.norm();
        let u = if norm > 0.0 { col / norm } else { d0.clone() };
        if (&u - &d0).norm() <= rho {
            out.set_column(i, &u);
            continue;
        }
        let tangent = &u - &d0 * u.dot(&d0);
        let t = if tangent.norm() > 1e-12 {
            tangent.normalize()
        } else {
            fallback_direction(&d0)
        };
        let mut psi = 2.0 * (rho / 2.0).asin();
        let mut v = &d0 * psi.cos() + &t * psi.sin();
        // Rounding can leave the chord a few ulps above rho.
        while (&v - &d0).norm() > rho {
            psi *= 1.0 - 1e-15;
            v = &d0 * psi.cos() + &t * psi.sin();
        }
        out.set_column(i, &v);
    }
    Dictionary::new(out)
}

/// First coordinate axis with a usable component orthogonal to `d0`,
/// orthogonalized against it.
fn fallback_direction(d0: &Vector) -> Vector {
    for j in 0..d0.len() {
        let mut e = Vector::zeros(d0.len());
        e[j] = 1.0;
        let r = &e - d0 * d0[j];
        if r.norm() > 1e-6 {
            return r.normalize();
        }
    }
    unreachable!("a unit vector in dimension >= 2 has an orthogonal axis residual")
}

/// `(HT_λ(Dᵀx), W s + b)`.
pub fn forward(bank: &ConceptBank, head: &LinearHead, x: &Vector, lambda: f64) -> Result<(Vector, Vector)> {
    check_len(bank.dim(), x.len())?;
    check_len(bank.n_concepts(), head.w.ncols())?;
    let codes = hard_threshold(&bank.dict.correlations(x)?, lambda);
    let logits = &head.w * &codes + &head.b;
    Ok((codes, logits))
}

/// Index of the largest entry; ties go to the smallest index.
pub fn argmax(v: &Vector) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Softmax probabilities and `−log p_y`.
fn softmax_ce(logits: &Vector, label: usize) -> (Vector, f64) {
    let max = logits.max();
    let exp = logits.map(|z| (z - max).exp());
    let sum = exp.sum();
    let loss = sum.ln() - (logits[label] - max);
    (exp / sum, loss)
}

pub fn evaluate(bank: &ConceptBank, head: &LinearHead, data: &EmbeddingDataset, lambda: f64) -> Result<Metrics> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    data.check_labels(head.n_classes())?;
    let mut correct = 0usize;
    let mut nnz = 0usize;
    let mut loss = 0.0;
    for i in 0..data.len() {
        let (codes, logits) = forward(bank, head, &data.sample(i), lambda)?;
        if argmax(&logits) == data.labels[i] {
            correct += 1;
        }
        nnz += l0_norm(&codes);
        loss += softmax_ce(&logits, data.labels[i]).1;
    }
    let m = data.len() as f64;
    let ael = nnz as f64 / m;
    Ok(Metrics {
        accuracy: correct as f64 / m,
        ael,
        asr: ael / bank.n_concepts() as f64,
        aced: bank.aced(),
        loss: loss / m,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Gradients {
    pub w: Matrix,
    pub b: Vector,
    /// `d x n`; only columns of kept activations receive signal.
    pub d: Matrix,
    pub loss: f64,
}

/// Mean cross-entropy gradients over `idx`, straight-through on kept codes.
pub(crate) fn batch_gradients(
    bank: &ConceptBank,
    head: &LinearHead,
    data: &EmbeddingDataset,
    idx: &[usize],
    lambda: f64,
) -> Result<Gradients> {
    let (dim, n, c) = (bank.dim(), bank.n_concepts(), head.n_classes());
    let mut g = Gradients { w: Matrix::zeros(c, n), b: Vector::zeros(c), d: Matrix::zeros(dim, n), loss: 0.0 };
    let scale = 1.0 / idx.len() as f64;
    for &h in idx {
        let x = data.sample(h);
        let (codes, logits) = forward(bank, head, &x, lambda)?;
        let (mut p, loss) = softmax_ce(&logits, data.labels[h]);
        p[data.labels[h]] -= 1.0;
        p *= scale;
        g.loss += loss * scale;
        g.w.ger(1.0, &p, &codes, 1.0);
        g.b += &p;
        let mut gs = head.w.tr_mul(&p);
        for (j, v) in gs.iter_mut().enumerate() {
            if codes[j] == 0.0 {
                *v = 0.0;
            }
        }
        g.d.ger(1.0, &x, &gs, 1.0);
    }
    Ok(g)
}

/// Trains head and bank; with `eta_d = 0` the bank is never touched.
pub fn train(
    bank: &ConceptBank,
    head: &LinearHead,
    data: &EmbeddingDataset,
    cfg: &TrainConfig,
) -> Result<(ConceptBank, LinearHead, Vec<EpochReport>)> {
    train_impl(bank, head, data, cfg, cfg.eta_d > 0.0)
}

pub(crate) fn train_impl(
    bank: &ConceptBank,
    head: &LinearHead,
    data: &EmbeddingDataset,
    cfg: &TrainConfig,
    update_bank: bool,
) -> Result<(ConceptBank, LinearHead, Vec<EpochReport>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_len(bank.dim(), data.dim())?;
    check_len(bank.n_concepts(), head.w.ncols())?;
    data.check_labels(head.n_classes())?;

    let mut bank = bank.clone();
    let mut head = head.clone();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut reports = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut rng = cfg.seed.derive(1 + epoch as u64).rng();
        order.shuffle(&mut rng);
        let mut max_deviation: f64 = bank.dict.deviation(&bank.dinit)?;
        let mut max_norm_error: f64 = norm_error(&bank.dict);
        for batch in order.chunks(cfg.batch) {
            let g = batch_gradients(&bank, &head, data, batch, cfg.lambda)?;
            if cfg.eta_l > 0.0 {
                head.w -= &g.w * cfg.eta_l;
                head.b -= &g.b * cfg.eta_l;
            }
            if update_bank {
                let stepped = Dictionary::new(bank.dict.matrix() - &g.d * cfg.eta_d)?;
                bank.dict = normalize_and_project(&stepped, &bank.dinit, cfg.rho)?;
                max_deviation = max_deviation.max(bank.dict.deviation(&bank.dinit)?);
                max_norm_error = max_norm_error.max(norm_error(&bank.dict));
            }
        }
        let metrics = evaluate(&bank, &head, data, cfg.lambda)?;
        reports.push(EpochReport { epoch: epoch + 1, metrics, max_deviation, max_norm_error });
    }
    Ok((bank, head, reports))
}

fn norm_error(dict: &Dictionary) -> f64 {
    dict.matrix().column_iter().map(|c| (c.norm() - 1.0).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fitted {
    pub bank: ConceptBank,
    pub head: LinearHead,
    pub epochs: Vec<EpochReport>,
}

/// Full pipeline: dispersion, random head, then [`train`].
pub fn fit(bank: &ConceptBank, data: &EmbeddingDataset, cfg: &TrainConfig) -> Result<Fitted> {
    cfg.validate()?;
    let bank = bank.dispersed(cfg.dispersion_r)?;
    let classes = data.n_classes();
    let head = LinearHead::random(classes, bank.n_concepts(), cfg.seed.derive(0));
    let (bank, head, epochs) = train(&bank, &head, data, cfg)?;
    Ok(Fitted { bank, head, epochs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationRow {
    pub index: usize,
    pub concept: String,
    pub score: f64,
    /// Head weight of this concept for the predicted class.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub predicted: usize,
    pub rows: Vec<ExplanationRow>,
}

/// Nonzero codes sorted by value descending (ties by index), at most `top`.
pub fn explain_sample(
    bank: &ConceptBank,
    head: &LinearHead,
    x: &Vector,
    lambda: f64,
    top: usize,
) -> Result<Explanation> {
    if top > bank.n_concepts() {
        return Err(Error::InvalidParams(format!("top={top} exceeds n={}", bank.n_concepts())));
    }
    let (codes, logits) = forward(bank, head, x, lambda)?;
    let predicted = argmax(&logits);
    let mut idx: Vec<usize> = (0..codes.len()).filter(|&j| codes[j] != 0.0).collect();
    idx.sort_by(|&a, &b| codes[b].total_cmp(&codes[a]).then(a.cmp(&b)));
    idx.truncate(top);
    let rows = idx
        .into_iter()
        .map(|j| ExplanationRow {
            index: j,
            concept: bank.names[j].clone(),
            score: codes[j],
            weight: head.w[(predicted, j)],
        })
        .collect();
    Ok(Explanation { predicted, rows })
}
