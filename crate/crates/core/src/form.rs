//! Symmetric bilinear forms, linear maps, inertia and pseudo-orthonormal bases.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{LinearMapWire, SymFormWire};
use crate::linalg::max_abs_matrix;

/// Default relative threshold for rank and signature decisions.
pub const RANK_TOL: f64 = 1e-10;

/// A symmetric bilinear form on `R^N`, stored as its Gram matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymFormWire", into = "SymFormWire")]
pub struct SymForm {
    entries: DMatrix<f64>,
}

impl SymForm {
    /// Accepts only exactly symmetric, finite, non-empty square matrices.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let asymmetry = max_abs_matrix(&(&entries - entries.transpose()));
        if asymmetry != 0.0 {
            return Err(Error::NotSymmetric { asymmetry });
        }
        Ok(Self { entries })
    }

    /// Builds the form from the symmetric part `(M + Mᵀ)/2`.
    pub fn from_symmetric_part(m: &DMatrix<f64>) -> Result<Self> {
        Self::new((m + m.transpose()) * 0.5)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.iter().map(Vec::len).find(|&l| l != n).unwrap_or(n),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.entries * y))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            entries: &self.entries * c,
        }
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1.0)
    }

    /// `A*φ`, the form `(x, y) ↦ φ(Ax, Ay)`, i.e. `Aᵀ φ A`.
    pub fn pullback(&self, a: &LinearMap) -> Result<Self> {
        check_dims(self.dim(), a.dim())?;
        let m = a.matrix().transpose() * &self.entries * a.matrix();
        Ok(Self {
            entries: (&m + m.transpose()) * 0.5,
        })
    }

    pub fn max_abs(&self) -> f64 {
        max_abs_matrix(&self.entries)
    }

    pub fn signature(&self, tol: f64) -> Signature {
        signature(self, tol)
    }

    pub fn rank(&self, tol: f64) -> usize {
        let s = signature(self, tol);
        s.plus + s.minus
    }
}

/// An `N × N` real matrix acting on column vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LinearMapWire", into = "LinearMapWire")]
pub struct LinearMap {
    matrix: DMatrix<f64>,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.iter().map(Vec::len).find(|&l| l != n).unwrap_or(n),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &LinearMap) -> Result<LinearMap> {
        check_dims(self.dim(), other.dim())?;
        Ok(LinearMap {
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn inverse(&self) -> Result<LinearMap> {
        let det = self.determinant();
        self.matrix
            .clone()
            .try_inverse()
            .map(|matrix| LinearMap { matrix })
            .ok_or(Error::SingularMap { det })
    }

    /// Fails with `SingularMap` unless `|det| > 1e-12`.
    pub fn ensure_invertible(&self) -> Result<()> {
        let det = self.determinant();
        if det.abs() > 1e-12 && det.is_finite() {
            Ok(())
        } else {
            Err(Error::SingularMap { det })
        }
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Inertia of a symmetric form: counts of positive, negative and zero
/// eigenvalues. The positive count is always listed first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.plus + self.minus + self.zero
    }

    pub fn rank(&self) -> usize {
        self.plus + self.minus
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.zero == 0
    }

    pub fn is_balanced(&self) -> bool {
        self.plus == self.minus
    }

    /// `{plus, minus}` as an unordered pair, smaller count first. Forms `φ`
    /// and `−φ` share this key.
    pub fn unordered(&self) -> (usize, usize) {
        (self.plus.min(self.minus), self.plus.max(self.minus))
    }
}

/// Counts eigenvalues above `tol·s`, below `−tol·s` and in between, where `s`
/// is the largest eigenvalue magnitude.
pub fn signature(form: &SymForm, tol: f64) -> Signature {
    let eig = form.matrix().clone().symmetric_eigenvalues();
    let s = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut sig = Signature {
        plus: 0,
        minus: 0,
        zero: 0,
    };
    for &l in eig.iter() {
        if s > 0.0 && l > tol * s {
            sig.plus += 1;
        } else if s > 0.0 && l < -tol * s {
            sig.minus += 1;
        } else {
            sig.zero += 1;
        }
    }
    sig
}

/// A basis `{e_i}` with `φ(e_i, e_j) = ε_i δ_ij`. Vectors are the columns of
/// `vectors`; positive-norm vectors come first.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoONBasis {
    pub vectors: DMatrix<f64>,
    pub signs: Vec<f64>,
}

impl PseudoONBasis {
    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }

    /// The diagonal Gram matrix `η = diag(ε)`.
    pub fn eta(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.signs))
    }

    pub fn signature(&self) -> Signature {
        let plus = self.signs.iter().filter(|&&s| s > 0.0).count();
        Signature {
            plus,
            minus: self.signs.len() - plus,
            zero: 0,
        }
    }

    /// `max |φ(e_i, e_j) − ε_i δ_ij|`.
    pub fn gram_residual(&self, form: &SymForm) -> f64 {
        let g = self.vectors.transpose() * form.matrix() * &self.vectors;
        max_abs_matrix(&(g - self.eta()))
    }

    /// The basis `{B e_i}`; still pseudo-orthonormal for `φ` when `B` is a
    /// `φ`-isometry.
    pub fn transformed(&self, map: &LinearMap) -> PseudoONBasis {
        PseudoONBasis {
            vectors: map.matrix() * &self.vectors,
            signs: self.signs.clone(),
        }
    }

    /// Columns `v'_j = Σ_i v_i S_ij` for a change of coordinates `S` with
    /// `Sᵀ η S = η`.
    pub fn mixed(&self, s: &DMatrix<f64>) -> PseudoONBasis {
        PseudoONBasis {
            vectors: &self.vectors * s,
            signs: self.signs.clone(),
        }
    }
}

/// Pseudo-orthonormal basis from the symmetric eigendecomposition
/// `φ = Q Λ Qᵀ`: `e_i = q_i / sqrt|λ_i|`, `ε_i = sign λ_i`.
pub fn pseudo_orthonormalize(form: &SymForm) -> Result<PseudoONBasis> {
    let n = form.dim();
    let sig = signature(form, RANK_TOL);
    if sig.zero > 0 {
        return Err(Error::DegenerateForm { nullity: sig.zero });
    }
    let eig = form.matrix().clone().symmetric_eigen();
    let mut cols: Vec<(f64, usize, DVector<f64>)> = (0..n)
        .map(|k| {
            let mut q = eig.eigenvectors.column(k).into_owned();
            let lead = q.iamax();
            if q[lead] < 0.0 {
                q.neg_mut();
            }
            (eig.eigenvalues[k], lead, q)
        })
        .collect();
    cols.sort_by(|a, b| {
        let sa = a.0 < 0.0;
        let sb = b.0 < 0.0;
        sa.cmp(&sb).then(a.1.cmp(&b.1)).then(a.0.total_cmp(&b.0))
    });
    let mut vectors = DMatrix::zeros(n, n);
    let mut signs = Vec::with_capacity(n);
    for (j, (lambda, _, q)) in cols.into_iter().enumerate() {
        vectors.set_column(j, &(q / lambda.abs().sqrt()));
        signs.push(lambda.signum());
    }
    Ok(PseudoONBasis { vectors, signs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_symmetric_with_signature;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_asymmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0 + 1e-15, 1.0]);
        assert!(matches!(SymForm::new(m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn rejects_empty_and_non_square() {
        assert_eq!(SymForm::new(DMatrix::zeros(0, 0)), Err(Error::EmptyDimension));
        assert!(SymForm::from_rows(&[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn signature_of_diagonal_forms() {
        let s = signature(&SymForm::diagonal(&[1.0, 1.0, -1.0]).unwrap(), RANK_TOL);
        assert_eq!((s.plus, s.minus, s.zero), (2, 1, 0));
        let s = signature(&SymForm::diagonal(&[1.0, 1.0, 0.0]).unwrap(), RANK_TOL);
        assert_eq!((s.plus, s.minus, s.zero), (2, 0, 1));
    }

    #[test]
    fn signature_of_two_by_two() {
        // eigenvalues 1 and 3
        let f = SymForm::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = signature(&f, RANK_TOL);
        assert_eq!((s.plus, s.minus, s.zero), (2, 0, 0));
    }

    #[test]
    fn signature_of_zero_form() {
        let s = signature(&SymForm::diagonal(&[0.0, 0.0]).unwrap(), RANK_TOL);
        assert_eq!(s.zero, 2);
    }

    #[test]
    fn orthonormalize_identity_is_standard_basis() {
        let b = pseudo_orthonormalize(&SymForm::identity(4)).unwrap();
        assert_eq!(b.vectors, DMatrix::identity(4, 4));
        assert_eq!(b.signs, vec![1.0; 4]);
    }

    #[test]
    fn orthonormalize_diagonal_rescales() {
        let b = pseudo_orthonormalize(&SymForm::diagonal(&[4.0, -9.0]).unwrap()).unwrap();
        assert!((b.vectors[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((b.vectors[(1, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(b.vectors[(0, 1)], 0.0);
        assert_eq!(b.vectors[(1, 0)], 0.0);
        assert_eq!(b.signs, vec![1.0, -1.0]);
    }

    #[test]
    fn orthonormalize_random_indefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, q) in [(5, 0), (3, 2), (1, 4), (0, 5)] {
            let m = random_symmetric_with_signature(&mut rng, p, q, 0);
            let f = SymForm::new(m).unwrap();
            let b = pseudo_orthonormalize(&f).unwrap();
            assert!(b.gram_residual(&f) < 1e-10);
            let sig = b.signature();
            assert_eq!((sig.plus, sig.minus), (p, q));
        }
    }

    #[test]
    fn orthonormalize_rejects_degenerate() {
        let f = SymForm::diagonal(&[1.0, 0.0, -1.0]).unwrap();
        assert_eq!(pseudo_orthonormalize(&f), Err(Error::DegenerateForm { nullity: 1 }));
    }

    #[test]
    fn form_pullback_matches_definition() {
        let f = SymForm::from_rows(&[vec![1.0, 2.0], vec![2.0, -3.0]]).unwrap();
        let a = LinearMap::from_rows(&[vec![1.0, 1.0], vec![0.0, 2.0]]).unwrap();
        let pb = f.pullback(&a).unwrap();
        let x = DVector::from_column_slice(&[0.3, -1.2]);
        let y = DVector::from_column_slice(&[2.0, 0.5]);
        let ax = a.matrix() * &x;
        let ay = a.matrix() * &y;
        assert!((pb.eval(&x, &y) - f.eval(&ax, &ay)).abs() < 1e-12);
    }

    #[test]
    fn singular_map_detected() {
        let a = LinearMap::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(a.ensure_invertible(), Err(Error::SingularMap { .. })));
    }
}
