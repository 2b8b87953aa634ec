//! Synthetic classification tasks for the concept pipeline.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::classifier::{ConceptBank, EmbeddingDataset};
use crate::error::{Error, Result};
use crate::linalg::{random_orthonormal, Dictionary, Matrix, Vector};
use crate::rng::Seed;

/// Layout of the benchmark produced by [`classification_benchmark`].
///
/// Class `c` owns the orthonormal centroid `d*_c`. The sample concept bank
/// tilts each centroid by the chord `misalignment` toward a private nuisance
/// direction `u_c`, and inputs carry Gaussian energy along every `u_c`, so a
/// misaligned bank leaks nuisance into the codes.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub dim: usize,
    pub classes: usize,
    /// Concepts present per input.
    pub active: usize,
    /// Coefficients of present concepts are uniform on this range.
    pub coef_range: (f64, f64),
    pub misalignment: f64,
    pub nuisance_std: f64,
    pub noise_std: f64,
    pub n_train: usize,
    pub n_test: usize,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            dim: 64,
            classes: 10,
            active: 3,
            coef_range: (0.5, 1.0),
            misalignment: 0.15,
            nuisance_std: 0.5,
            noise_std: 0.02,
            n_train: 2000,
            n_test: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub centroids: Dictionary,
    pub bank: ConceptBank,
    pub train: EmbeddingDataset,
    pub test: EmbeddingDataset,
}

pub fn classification_benchmark(spec: &BenchmarkSpec, seed: Seed) -> Result<Benchmark> {
    let c = spec.classes;
    if 2 * c > spec.dim {
        return Err(Error::InvalidParams(format!("need dim >= 2*classes, got {} < {}", spec.dim, 2 * c)));
    }
    if spec.active == 0 || spec.active > c {
        return Err(Error::InvalidParams("active must be in 1..=classes".into()));
    }
    if !(spec.misalignment >= 0.0 && spec.misalignment < 2.0_f64.sqrt()) {
        return Err(Error::InvalidParams("misalignment chord must be in [0, sqrt 2)".into()));
    }
    let q = random_orthonormal(spec.dim, 2 * c, seed.derive(0))?;
    let centroids = Dictionary::new(q.matrix().columns(0, c).into_owned())?;
    let nuisance = q.matrix().columns(c, c).into_owned();

    let alpha = 2.0 * (spec.misalignment / 2.0).asin();
    let tilted = centroids.matrix() * alpha.cos() + &nuisance * alpha.sin();
    let names = (0..c).map(|i| format!("concept_{i}")).collect();
    let bank = ConceptBank::new(names, tilted)?;

    let draw = |m: usize, s: Seed| -> Result<EmbeddingDataset> {
        let mut rng = s.rng();
        let mut x = Matrix::zeros(m, spec.dim);
        let mut labels = Vec::with_capacity(m);
        for h in 0..m {
            let support = rand::seq::index::sample(&mut rng, c, spec.active).into_vec();
            let mut v = Vector::zeros(spec.dim);
            let (mut label, mut best) = (0, f64::NEG_INFINITY);
            for &j in &support {
                let a = rng.random_range(spec.coef_range.0..=spec.coef_range.1);
                if a > best {
                    best = a;
                    label = j;
                }
                v.axpy(a, &centroids.matrix().column(j), 1.0);
            }
            for j in 0..c {
                let g: f64 = StandardNormal.sample(&mut rng);
                v.axpy(spec.nuisance_std * g, &nuisance.column(j), 1.0);
            }
            for vi in v.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *vi += spec.noise_std * g;
            }
            x.set_row(h, &v.transpose());
            labels.push(label);
        }
        EmbeddingDataset::new(x, labels, true)
    };
    let train = draw(spec.n_train, seed.derive(1))?;
    let test = draw(spec.n_test, seed.derive(2))?;
    Ok(Benchmark { centroids, bank, train, test })
}

/// `n` unit columns within `max_angle / 2` of a common random direction, so
/// every pairwise angle is at most `max_angle`.
pub fn clustered_bank(dim: usize, n: usize, max_angle: f64, seed: Seed) -> Result<Dictionary> {
    if dim < 2 {
        return Err(Error::InvalidParams("dim must be >= 2".into()));
    }
    let mut rng = seed.rng();
    let center = random_orthonormal(dim, 1, seed.derive(0))?.column(0);
    let mut out = Matrix::zeros(dim, n);
    for j in 0..n {
        let g = Vector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        let tangent = &g - &center * center.dot(&g);
        let e = tangent.normalize();
        let a = rng.random_range(0.0..=max_angle / 2.0);
        out.set_column(j, &(&center * a.cos() + e * a.sin()));
    }
    Dictionary::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_shapes_and_misalignment() {
        let spec = BenchmarkSpec { n_train: 50, n_test: 30, ..BenchmarkSpec::default() };
        let b = classification_benchmark(&spec, Seed(1)).unwrap();
        assert_eq!(b.train.len(), 50);
        assert_eq!(b.test.len(), 30);
        assert_eq!(b.bank.dim(), 64);
        for i in 0..10 {
            let chord = (b.bank.dict.column(i) - b.centroids.column(i)).norm();
            assert!((chord - 0.15).abs() < 1e-12);
        }
        assert!(b.train.labels.iter().all(|&l| l < 10));
        assert!(b.bank.dict.has_unit_columns(1e-12));
    }

    #[test]
    fn clustered_bank_angles() {
        let max = 25f64.to_radians();
        let d = clustered_bank(16, 12, max, Seed(2)).unwrap();
        for i in 0..12 {
            for j in 0..i {
                let c = d.column(i).dot(&d.column(j)).clamp(-1.0, 1.0);
                assert!(c.acos() <= max + 1e-12);
            }
        }
    }
}
