//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector, Schur};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub(crate) fn max_abs_matrix(m: &DMatrix<f64>) -> f64 {
    max_abs(m.as_slice())
}

/// Orthonormal basis (as columns) of the column space of `m`, keeping
/// singular directions above `rel_tol` times the largest singular value.
pub fn orthonormal_columns(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * smax)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Largest principal angle (radians) between the column spaces of `a` and
/// `b`, both assumed to have orthonormal columns. Returns `π/2` when the
/// dimensions differ. Computed from sines so tiny angles keep their accuracy.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() || a.nrows() != b.nrows() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let proj = a * (a.transpose() * b);
    let residual = b - proj;
    let s = residual.svd(false, false).singular_values.max();
    s.clamp(0.0, 1.0).asin()
}

/// Real parts of the eigenvalues of a general square matrix, ascending.
///
/// The Schur iteration is capped; when it stalls (which happens on some
/// nearly scalar inputs) the matrix is conjugated by a fixed reflection and
/// the iteration retried. Nearly scalar matrices are answered directly.
pub fn eigenvalue_real_parts(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let shift = m.trace() / n as f64;
    let offset = m - DMatrix::identity(n, n) * shift;
    if offset.abs().max() <= 1e-13 * shift.abs().max(m.abs().max()) {
        return Ok(vec![shift; n]);
    }
    let max_iter = 1000 * n.max(10);
    let mut work = offset;
    for attempt in 0..4 {
        if let Some(schur) = Schur::try_new(work.clone(), f64::EPSILON, max_iter) {
            let mut ev: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.re + shift).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        // Householder reflection along a fixed, attempt-dependent direction.
        let v = DVector::from_fn(n, |i, _| 1.0 + ((i + attempt) % n) as f64);
        let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / v.norm_squared());
        work = &h * work * &h;
    }
    Err(Error::NoConvergence("eigenvalue iteration did not converge".into()))
}

pub fn random_normal_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// diagonal of R made positive).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = random_normal_matrix(rng, n, n, 1.0);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random symmetric matrix with prescribed signature: `Qᵀ D Q` with `Q`
/// orthogonal and `D` holding `plus` positive, `minus` negative and `zero`
/// zero eigenvalues of magnitude in `[0.5, 2]`.
pub fn random_symmetric_with_signature<R: Rng + ?Sized>(
    rng: &mut R,
    plus: usize,
    minus: usize,
    zero: usize,
) -> DMatrix<f64> {
    let n = plus + minus + zero;
    let q = random_orthogonal(rng, n);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mag = rng.random_range(0.5..2.0);
        d[(i, i)] = if i < plus {
            mag
        } else if i < plus + minus {
            -mag
        } else {
            0.0
        };
    }
    let m = q.transpose() * d * q;
    (&m + m.transpose()) * 0.5
}
