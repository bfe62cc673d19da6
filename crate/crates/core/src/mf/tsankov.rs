//! Skew-Tsankov models: curvature operators `𝓡(x, y)` that pairwise
//! commute, and the splitting of a Riemannian one into invariant 2-planes
//! plus the kernel.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{check_dims, pseudo_orthonormalize, SymForm, RANK_TOL};
use crate::linalg::{max_abs_matrix, orthonormal_columns};
use crate::tensor::{build_canonical, direct_sum, kernel, CurvTensor};

/// Re-randomizations of the combination coefficients before falling back to
/// an arbitrary invariant splitting of repeated eigenvalues.
pub const DECOMPOSE_RETRIES: usize = 5;

/// Relative gap below which two eigenvalues of `S²` are treated as equal.
const CLUSTER_TOL: f64 = 1e-6;

/// `𝓡(e_i, e_j)` for `i < j`, as matrices with `φ(𝓡(x,y)z, w) = R(x,y,z,w)`.
pub fn curvature_operators(form: &SymForm, t: &CurvTensor) -> Result<Vec<DMatrix<f64>>> {
    check_dims(t.dim(), form.dim())?;
    let sig = form.signature(RANK_TOL);
    if sig.zero > 0 {
        return Err(Error::DegenerateForm { nullity: sig.zero });
    }
    let n = t.dim();
    let inv = form.matrix().clone().try_inverse().ok_or(Error::DegenerateForm {
        nullity: sig.zero.max(1),
    })?;
    let mut ops = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let lowered = DMatrix::from_fn(n, n, |w, c| t.get(i, j, c, w));
            ops.push(&inv * lowered);
        }
    }
    Ok(ops)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutationReport {
    /// Largest entry of any commutator `[𝓡(e_i,e_j), 𝓡(e_k,e_l)]`.
    pub max_commutator: f64,
    /// Largest Frobenius norm of an operator.
    pub max_operator_norm: f64,
    /// `tol · max_operator_norm²`.
    pub threshold: f64,
    pub pass: bool,
}

/// Pairwise commutation of the curvature operators.
pub fn skew_tsankov_report(form: &SymForm, t: &CurvTensor, tol: f64) -> Result<CommutationReport> {
    let ops = curvature_operators(form, t)?;
    let max_operator_norm = ops.iter().map(|o| o.norm()).fold(0.0, f64::max);
    let mut max_commutator = 0.0_f64;
    for a in 0..ops.len() {
        for b in (a + 1)..ops.len() {
            let c = &ops[a] * &ops[b] - &ops[b] * &ops[a];
            max_commutator = max_commutator.max(max_abs_matrix(&c));
        }
    }
    let threshold = tol * max_operator_norm * max_operator_norm;
    Ok(CommutationReport {
        max_commutator,
        max_operator_norm,
        threshold,
        pass: max_commutator <= threshold,
    })
}

/// True iff all curvature operators commute within `tol`.
pub fn skew_tsankov_check(form: &SymForm, t: &CurvTensor, tol: f64) -> Result<bool> {
    Ok(skew_tsankov_report(form, t, tol)?.pass)
}

/// `V = ⊕ V_i ⊕ ker R` with `dim V_i = 2`. Planes and kernel are given in the
/// original coordinates with `φ`-orthonormal columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewTsankovDecomposition {
    pub planes: Vec<DMatrix<f64>>,
    pub kernel: DMatrix<f64>,
    /// Sectional curvature of each plane.
    pub kappas: Vec<f64>,
    /// `max |T − ⊕ T|_{V_i}|` in the adapted basis.
    pub reconstruction_residual: f64,
    /// Number of coefficient draws used.
    pub attempts: usize,
}

/// Groups ascending eigenvalues into clusters of numerically equal values.
fn clusters(values: &[f64], scale: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > CLUSTER_TOL * scale {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Splits the `S`-invariant subspace `w` (orthonormal columns) into planes
/// `span{u, Su}`.
fn split_invariant(s: &DMatrix<f64>, w: DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let mut rest = w;
    let mut planes = Vec::new();
    while rest.ncols() >= 2 {
        if rest.ncols() == 2 {
            planes.push(rest);
            break;
        }
        let u = rest.column(0).into_owned();
        let su = s * &u;
        let v = &su - &u * u.dot(&su);
        let plane = DMatrix::from_columns(&[u.clone(), v.normalize()]);
        // complement of the plane inside `rest`, in rest's own coordinates
        let c = rest.transpose() * &plane;
        let k = rest.ncols();
        let eig = (DMatrix::identity(k, k) - &c * c.transpose()).symmetric_eigen();
        let keep: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        let coords = DMatrix::from_fn(k, keep.len(), |r, j| eig.eigenvectors[(r, keep[j])]);
        rest = &rest * coords;
        planes.push(plane);
    }
    planes
}

/// Decomposes a Riemannian skew-Tsankov model into invariant 2-planes and
/// the kernel, returning the sectional curvatures of the planes.
pub fn skew_tsankov_decompose<R: Rng + ?Sized>(
    form: &SymForm,
    t: &CurvTensor,
    tol: f64,
    rng: &mut R,
) -> Result<SkewTsankovDecomposition> {
    check_dims(t.dim(), form.dim())?;
    let sig = form.signature(RANK_TOL);
    if sig.minus > 0 || sig.zero > 0 {
        return Err(Error::NotPositiveDefinite {
            minus: sig.minus,
            zero: sig.zero,
        });
    }
    let report = skew_tsankov_report(form, t, tol)?;
    if !report.pass {
        return Err(Error::NotSkewTsankov {
            residual: report.max_commutator,
        });
    }

    // orthonormal coordinates: operators are skew matrices O_ij[a][c] = T'_ijca
    let basis = pseudo_orthonormalize(form)?;
    let n = t.dim();
    let tp = t.restrict(&basis.vectors)?;
    let ker = kernel(&tp, RANK_TOL);
    let comp = orthonormal_columns(&(DMatrix::identity(n, n) - &ker * ker.transpose()), 1e-8);
    let m = comp.ncols();
    let ops: Vec<DMatrix<f64>> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let o = DMatrix::from_fn(n, n, |a, c| tp.get(i, j, c, a));
            comp.transpose() * o * &comp
        })
        .collect();

    let mut planes_local = Vec::new();
    let mut attempts = 0;
    if m > 0 {
        loop {
            attempts += 1;
            let s = ops.iter().fold(DMatrix::zeros(m, m), |acc, o| {
                acc + o * rng.sample::<f64, _>(StandardNormal)
            });
            let eig = (&s * &s).symmetric_eigen();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
            let scale = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let groups = clusters(&vals, scale);
            let separated = scale > 0.0
                && groups
                    .iter()
                    .all(|g| g.len() == 2 && vals[g.start].abs() > CLUSTER_TOL * scale);
            if separated || attempts > DECOMPOSE_RETRIES {
                if !separated && (scale == 0.0 || m % 2 == 1) {
                    return Err(Error::DegenerateSpectrum(format!(
                        "no separating combination after {attempts} draws"
                    )));
                }
                for g in groups {
                    let w = DMatrix::from_fn(m, g.len(), |r, c| eig.eigenvectors[(r, order[g.start + c])]);
                    planes_local.extend(split_invariant(&s, w));
                }
                break;
            }
        }
    }
    if planes_local.len() * 2 != m {
        return Err(Error::DegenerateSpectrum(format!(
            "found {} planes in a complement of dimension {m}",
            planes_local.len()
        )));
    }

    // adapted orthonormal basis in T' coordinates: planes first, then kernel
    let mut adapted = DMatrix::zeros(n, n);
    let mut planes = Vec::with_capacity(planes_local.len());
    let mut kappas = Vec::with_capacity(planes_local.len());
    let mut parts = Vec::new();
    for (p, pl) in planes_local.iter().enumerate() {
        let cols = &comp * pl;
        adapted.view_mut((0, 2 * p), (n, 2)).copy_from(&cols);
        let restricted = tp.restrict(&cols)?;
        kappas.push(restricted.get(0, 1, 1, 0));
        parts.push(restricted);
        planes.push(&basis.vectors * cols);
    }
    if ker.ncols() > 0 {
        adapted.view_mut((0, m), (n, ker.ncols())).copy_from(&ker);
        parts.push(CurvTensor::zeros(ker.ncols()));
    }
    let in_adapted = tp.restrict(&adapted)?;
    let rebuilt = direct_sum(&parts)?;
    let reconstruction_residual = in_adapted.max_abs_diff(&rebuilt);
    if reconstruction_residual > tol * tp.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateSpectrum(format!(
            "reconstruction residual {reconstruction_residual:e} after {attempts} draws"
        )));
    }
    Ok(SkewTsankovDecomposition {
        planes,
        kernel: &basis.vectors * ker,
        kappas,
        reconstruction_residual,
        attempts,
    })
}

/// `⊕ κ_i R_{I_2} ⊕ 0_{kernel}`, the model a decomposition describes.
pub fn skew_tsankov_model(kappas: &[f64], kernel_dim: usize) -> Result<CurvTensor> {
    let mut parts: Vec<CurvTensor> = kappas
        .iter()
        .map(|&k| build_canonical(&SymForm::identity(2)).scaled(k))
        .collect();
    if kernel_dim > 0 {
        parts.push(CurvTensor::zeros(kernel_dim));
    }
    direct_sum(&parts)
}
