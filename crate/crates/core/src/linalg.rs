//! Shared vector/matrix types, column norms, seeded orthonormal sampling and
//! Euclidean ball projection.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::Seed;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Tolerance on column norms for dictionaries flagged as unit-column.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// A `d x n` matrix whose columns are concept embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    mat: Matrix,
}

impl Dictionary {
    pub fn new(mat: Matrix) -> Result<Self> {
        if mat.nrows() == 0 || mat.ncols() == 0 {
            return Err(Error::EmptyInput);
        }
        if !is_finite(&mat) {
            return Err(Error::NonFinite("dictionary"));
        }
        Ok(Self { mat })
    }

    /// Like [`Dictionary::new`] but also requires unit-norm columns.
    pub fn with_unit_columns(mat: Matrix) -> Result<Self> {
        let dict = Self::new(mat)?;
        if !dict.has_unit_columns(UNIT_NORM_TOL) {
            return Err(Error::InvalidParams("columns are not unit norm".into()));
        }
        Ok(dict)
    }

    /// Normalizes every column; zero columns are rejected.
    pub fn normalized(mat: Matrix) -> Result<Self> {
        let mut mat = mat;
        for mut col in mat.column_iter_mut() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(Error::ZeroInput);
            }
            col /= norm;
        }
        Self::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn n_atoms(&self) -> usize {
        self.mat.ncols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn column(&self, i: usize) -> Vector {
        self.mat.column(i).into_owned()
    }

    pub fn has_unit_columns(&self, tol: f64) -> bool {
        self.mat.column_iter().all(|c| (c.norm() - 1.0).abs() <= tol)
    }

    /// `D^T x`.
    pub fn correlations(&self, x: &Vector) -> Result<Vector> {
        check_len(self.dim(), x.len())?;
        Ok(self.mat.tr_mul(x))
    }

    /// `‖self − other‖_{1,2}`.
    pub fn deviation(&self, other: &Dictionary) -> Result<f64> {
        check_shape(self, other)?;
        column_norm_max(&(&self.mat - &other.mat))
    }
}

fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn check_shape(a: &Dictionary, b: &Dictionary) -> Result<()> {
    check_len(a.dim(), b.dim())?;
    check_len(a.n_atoms(), b.n_atoms())
}

/// Maximum column-wise ℓ2 norm, `‖m‖_{1,2}`.
pub fn column_norm_max(m: &Matrix) -> Result<f64> {
    if m.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(m.column_iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// Draws a `d x n` matrix with orthonormal columns.
///
/// Gaussian fill followed by Householder QR; columns of `Q` are flipped so the
/// diagonal of `R` is positive, which makes the factor unique for a given
/// Gaussian draw.
pub fn random_orthonormal(d: usize, n: usize, seed: Seed) -> Result<Dictionary> {
    if n > d {
        return Err(Error::CannotOrthonormalize { d, n });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = seed.rng();
    let mut gauss = Matrix::zeros(d, n);
    for j in 0..n {
        for i in 0..d {
            gauss[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Dictionary::new(q)
}

/// Euclidean projection of `v` onto the ball `{u : ‖u − center‖ ≤ rho}`.
pub fn project_to_ball(v: &Vector, center: &Vector, rho: f64) -> Result<Vector> {
    if rho < 0.0 {
        return Err(Error::NegativeRadius(rho));
    }
    check_len(center.len(), v.len())?;
    let offset = v - center;
    let dist = offset.norm();
    if dist <= rho {
        return Ok(v.clone());
    }
    Ok(center + offset * (rho / dist))
}

/// Max-abs entry of `DᵀD − I`.
pub fn orthonormality_error(d: &Matrix) -> f64 {
    let gram = d.tr_mul(d);
    let n = gram.nrows();
    (gram - Matrix::identity(n, n)).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn column_norm_max_examples() {
        assert_eq!(column_norm_max(&Matrix::identity(3, 3)).unwrap(), 1.0);
        assert_eq!(column_norm_max(&Matrix::zeros(2, 2)).unwrap(), 0.0);
        let m = Matrix::from_columns(&[vec(&[3.0, 4.0]), vec(&[1.0, 0.0])]);
        assert!((column_norm_max(&m).unwrap() - 5.0).abs() < 1e-15);
        assert!(matches!(column_norm_max(&Matrix::zeros(0, 0)), Err(Error::EmptyInput)));
    }

    #[test]
    fn orthonormal_one_dimensional() {
        for s in 0..5 {
            let d = random_orthonormal(1, 1, Seed(s)).unwrap();
            assert_eq!(d.matrix()[(0, 0)].abs(), 1.0);
        }
    }

    #[test]
    fn orthonormal_square_and_tall() {
        let d = random_orthonormal(5, 5, Seed(7)).unwrap();
        assert!(orthonormality_error(d.matrix()) <= 1e-10);
        let d = random_orthonormal(64, 10, Seed(1)).unwrap();
        assert!(orthonormality_error(d.matrix()) <= 1e-10);
        assert!(d.has_unit_columns(1e-10));
    }

    #[test]
    fn orthonormal_is_deterministic() {
        let a = random_orthonormal(6, 4, Seed(42)).unwrap();
        let b = random_orthonormal(6, 4, Seed(42)).unwrap();
        let bits = |d: &Dictionary| d.matrix().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a, random_orthonormal(6, 4, Seed(43)).unwrap());
    }

    #[test]
    fn orthonormal_rejects_wide() {
        assert!(matches!(
            random_orthonormal(3, 4, Seed(0)),
            Err(Error::CannotOrthonormalize { d: 3, n: 4 })
        ));
    }

    #[test]
    fn projection_examples() {
        let c = vec(&[1.0, 0.0, 0.0]);
        assert_eq!(project_to_ball(&c, &c, 0.1).unwrap(), c);
        let v = vec(&[1.0, 0.3, 0.0]);
        let p = project_to_ball(&v, &c, 0.1).unwrap();
        assert!((p - vec(&[1.0, 0.1, 0.0])).norm() < 1e-15);
        let inside = vec(&[1.0, 0.05, 0.0]);
        assert_eq!(project_to_ball(&inside, &c, 0.1).unwrap(), inside);
        assert!(matches!(project_to_ball(&v, &c, -1.0), Err(Error::NegativeRadius(_))));
        assert!(project_to_ball(&vec(&[1.0]), &c, 1.0).is_err());
    }

    #[test]
    fn dictionary_rejects_non_finite() {
        let m = Matrix::from_element(2, 2, f64::NAN);
        assert!(Dictionary::new(m).is_err());
        assert!(Dictionary::new(Matrix::zeros(0, 3)).is_err());
    }

    proptest! {
        #[test]
        fn projection_idempotent_and_feasible(
            v in proptest::collection::vec(-5.0f64..5.0, 4),
            c in proptest::collection::vec(-5.0f64..5.0, 4),
            rho in 0.0f64..3.0,
        ) {
            let v = vec(&v);
            let c = vec(&c);
            let once = project_to_ball(&v, &c, rho).unwrap();
            let twice = project_to_ball(&once, &c, rho).unwrap();
            prop_assert!((&once - &c).norm() <= rho + 1e-12);
            prop_assert!((&twice - &once).norm() <= 1e-12);
        }

        #[test]
        fn orthonormal_columns(d in 1usize..12, frac in 0.0f64..1.0, seed in any::<u64>()) {
            let n = 1 + ((d - 1) as f64 * frac) as usize;
            let q = random_orthonormal(d, n, Seed(seed)).unwrap();
            prop_assert!(orthonormality_error(q.matrix()) <= 1e-10);
        }
    }
}
