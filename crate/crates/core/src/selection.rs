//! Concept selection: top-k correlation support, greedy IP-OMP, and entry-wise
//! hard thresholding.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::{check_len, Dictionary, Vector};

/// Sorted set of distinct column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a set from arbitrary indices, sorting and removing duplicates.
    pub fn from_indices(mut idx: Vec<usize>) -> Self {
        idx.sort_unstable();
        idx.dedup();
        Self(idx)
    }

    pub(crate) fn from_sorted(idx: Vec<usize>) -> Self {
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        Self(idx)
    }

    /// The first `k` indices, `{0, .., k−1}`.
    pub fn prefix(k: usize) -> Self {
        Self((0..k).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub(crate) fn check_range(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&i) if i >= n => Err(Error::IndexOutOfRange { index: i, len: n }),
            _ => Ok(()),
        }
    }
}

/// Indices of the `k` largest `|⟨d_i, x⟩|`; ties go to the smaller index.
pub fn top_k_support(dict: &Dictionary, x: &Vector, k: usize) -> Result<SupportSet> {
    if k > dict.n_atoms() {
        return Err(Error::InvalidParams(format!("k={k} exceeds n={}", dict.n_atoms())));
    }
    let scores = dict.correlations(x)?;
    Ok(top_k_of_scores(scores.as_slice(), k))
}

pub(crate) fn top_k_of_scores(scores: &[f64], k: usize) -> SupportSet {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .abs()
            .partial_cmp(&scores[a].abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(k);
    SupportSet::from_indices(order)
}

/// Greedy IP-OMP: at each step picks the column maximizing
/// `|⟨Π⊥d_i, Π⊥x⟩| / (‖Π⊥d_i‖ ‖Π⊥x‖)`, where `Π⊥` projects onto the orthogonal
/// complement of the columns already chosen.
///
/// Returns the ordered selection; it is shorter than `k` when the residual of
/// `x` vanishes or no candidate has a nonzero residual.
pub fn ip_omp_select(dict: &Dictionary, x: &Vector, k: usize) -> Result<Vec<usize>> {
    let (d, n) = (dict.dim(), dict.n_atoms());
    check_len(d, x.len())?;
    if k > d.min(n) {
        return Err(Error::InvalidParams(format!("k={k} exceeds min(d, n)={}", d.min(n))));
    }
    let x_norm = x.norm();
    if x_norm == 0.0 {
        return Err(Error::ZeroInput);
    }
    // Relative threshold below which a residual counts as zero.
    let eps = 1e-12;
    let mut basis: Vec<Vector> = Vec::with_capacity(k);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut residual_x = x.clone();

    for _ in 0..k {
        let rx_norm = residual_x.norm();
        if rx_norm <= eps * x_norm {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if chosen.contains(&i) {
                continue;
            }
            let col = dict.column(i);
            let col_norm = col.norm();
            let rd = orthogonalize(col, &basis);
            let rd_norm = rd.norm();
            if rd_norm <= eps * col_norm.max(f64::MIN_POSITIVE) {
                continue;
            }
            let score = rd.dot(&residual_x).abs() / (rd_norm * rx_norm);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let Some((pick, _)) = best else { break };
        chosen.push(pick);
        let q = orthogonalize(dict.column(pick), &basis);
        let q = &q / q.norm();
        let q = reorthogonalize(q, &basis);
        residual_x -= &q * q.dot(&residual_x);
        basis.push(q);
    }
    Ok(chosen)
}

fn orthogonalize(mut v: Vector, basis: &[Vector]) -> Vector {
    for q in basis {
        let c = q.dot(&v);
        v.axpy(-c, q, 1.0);
    }
    v
}

fn reorthogonalize(v: Vector, basis: &[Vector]) -> Vector {
    let v = orthogonalize(v, basis);
    let norm = v.norm();
    v / norm
}

/// `HT_λ(v)_i = v_i` if `|v_i| ≥ λ`, else 0.
pub fn hard_threshold(v: &Vector, lambda: f64) -> Vector {
    v.map(|x| if x.abs() >= lambda { x } else { 0.0 })
}

/// Count of nonzero entries.
pub fn l0_norm(v: &Vector) -> usize {
    v.iter().filter(|x| **x != 0.0).count()
}
