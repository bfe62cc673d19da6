//! Algebraic curvature tensors: validation, the canonical construction
//! `R_φ`, direct sums, pullbacks, kernels and decomposability.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::{check_dims, LinearMap, SymForm, RANK_TOL};
use crate::io::CurvTensorWire;
use crate::linalg::{max_abs, orthonormal_columns};
use crate::multilinear::transform_all;
use crate::par::Exec;

/// Relative tolerance applied when a `CurvTensor` is constructed.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

/// A covariant 4-tensor satisfying the curvature identities, stored densely
/// in row-major order: component `(i, j, k, l)` lives at `((i·N + j)·N + k)·N + l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurvTensorWire", into = "CurvTensorWire")]
pub struct CurvTensor {
    dim: usize,
    components: Vec<f64>,
}

/// Maximum residual of each curvature identity, with the verdict against
/// `tol · scale` where `scale` is the largest component magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub bianchi: f64,
    pub scale: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        self.antisymmetry.max(self.pair_symmetry).max(self.bianchi)
    }

    /// Largest residual divided by the component scale (0 for the zero tensor).
    pub fn relative_residual(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.max_residual() / self.scale
        }
    }
}

#[inline]
pub(crate) fn idx4(n: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * n + j) * n + k) * n + l
}

/// Check the three curvature identities on raw components.
pub fn validate_components(dim: usize, c: &[f64], tol: f64) -> ValidationReport {
    let n = dim;
    let at = |i, j, k, l| c[idx4(n, i, j, k, l)];
    let (mut anti, mut pair, mut bianchi) = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = at(i, j, k, l);
                    anti = anti.max((r + at(j, i, k, l)).abs());
                    pair = pair.max((r - at(k, l, i, j)).abs());
                    bianchi = bianchi.max((r + at(i, k, l, j) + at(i, l, j, k)).abs());
                }
            }
        }
    }
    let scale = max_abs(c);
    let allowed = tol * scale;
    ValidationReport {
        antisymmetry: anti,
        pair_symmetry: pair,
        bianchi,
        scale,
        tol,
        pass: anti <= allowed && pair <= allowed && bianchi <= allowed,
    }
}

impl CurvTensor {
    /// Validates the curvature identities at `CONSTRUCTION_TOL`; inputs that
    /// fail are rejected, never repaired.
    pub fn new(dim: usize, components: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        check_dims(dim.pow(4), components.len())?;
        if components.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let report = validate_components(dim, &components, CONSTRUCTION_TOL);
        if !report.pass {
            return Err(Error::NotCurvature {
                residual: report.max_residual(),
                allowed: CONSTRUCTION_TOL * report.scale,
            });
        }
        Ok(Self { dim, components })
    }

    /// For results of operations that preserve the identities exactly up to
    /// rounding.
    pub(crate) fn from_trusted(dim: usize, components: Vec<f64>) -> Self {
        debug_assert_eq!(components.len(), dim.pow(4));
        Self { dim, components }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_trusted(dim, vec![0.0; dim.pow(4)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.components[idx4(self.dim, i, j, k, l)]
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.components)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_trusted(self.dim, self.components.iter().map(|x| c * x).collect())
    }

    /// Max component-wise difference.
    pub fn max_abs_diff(&self, other: &CurvTensor) -> f64 {
        assert_eq!(self.dim, other.dim, "tensor dimensions differ");
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        validate_components(self.dim, &self.components, tol)
    }

    /// `R(x, y, z, w)` for arbitrary vectors.
    pub fn eval(
        &self,
        x: &nalgebra::DVector<f64>,
        y: &nalgebra::DVector<f64>,
        z: &nalgebra::DVector<f64>,
        w: &nalgebra::DVector<f64>,
    ) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let c = x[i] * y[j] * z[k];
                    if c == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        s += c * w[l] * self.get(i, j, k, l);
                    }
                }
            }
        }
        s
    }

    /// Components of the restriction to the span of the columns of `basis`
    /// (`N × m`), expressed in that basis.
    pub fn restrict(&self, basis: &DMatrix<f64>) -> Result<CurvTensor> {
        check_dims(self.dim, basis.nrows())?;
        let m = basis.ncols();
        if m == 0 {
            return Err(Error::EmptyDimension);
        }
        let comps = transform_all(Exec::default(), &self.components, self.dim, 4, basis);
        Ok(CurvTensor::from_trusted(m, comps))
    }
}

/// `R_φ(x, y, z, w) = φ(x, w) φ(y, z) − φ(x, z) φ(y, w)`.
pub fn build_canonical(form: &SymForm) -> CurvTensor {
    let n = form.dim();
    let mut c = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    c[idx4(n, i, j, k, l)] = form.get(i, l) * form.get(j, k) - form.get(i, k) * form.get(j, l);
                }
            }
        }
    }
    CurvTensor::from_trusted(n, c)
}

/// Block-diagonal embedding of `parts` into the direct sum of their spaces.
pub fn direct_sum(parts: &[CurvTensor]) -> Result<CurvTensor> {
    if parts.is_empty() {
        return Err(Error::EmptyDimension);
    }
    let n: usize = parts.iter().map(CurvTensor::dim).sum();
    let mut c = vec![0.0; n.pow(4)];
    let mut off = 0;
    for part in parts {
        let d = part.dim();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        c[idx4(n, off + i, off + j, off + k, off + l)] = part.get(i, j, k, l);
                    }
                }
            }
        }
        off += d;
    }
    Ok(CurvTensor::from_trusted(n, c))
}

/// `(A*T)_{ijkl} = Σ T_{pqrs} A_{pi} A_{qj} A_{rk} A_{sl}`.
pub fn pullback(a: &LinearMap, t: &CurvTensor) -> Result<CurvTensor> {
    pullback_with(Exec::default(), a, t)
}

pub fn pullback_with(exec: Exec, a: &LinearMap, t: &CurvTensor) -> Result<CurvTensor> {
    check_dims(t.dim(), a.dim())?;
    if a.matrix().is_identity(0.0) {
        return Ok(t.clone());
    }
    let comps = transform_all(exec, t.components(), t.dim(), 4, a.matrix());
    Ok(CurvTensor::from_trusted(t.dim(), comps))
}

/// Flatten with `slot` as the row index: an `N × N³` matrix whose row `v`
/// lists the components with index `v` in position `slot`.
fn flatten_slot(t: &CurvTensor, slot: usize) -> DMatrix<f64> {
    let n = t.dim();
    let n3 = n * n * n;
    let mut m = DMatrix::zeros(n, n3);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let (v, a, b, c) = match slot {
                        0 => (i, j, k, l),
                        1 => (j, i, k, l),
                        2 => (k, i, j, l),
                        _ => (l, i, j, k),
                    };
                    m[(v, (a * n + b) * n + c)] = t.get(i, j, k, l);
                }
            }
        }
    }
    m
}

/// Orthonormal (Euclidean) basis of `{v : R(v, ·, ·, ·) = 0}`, as columns.
pub fn kernel(t: &CurvTensor, tol: f64) -> DMatrix<f64> {
    kernel_in_slot(t, 0, tol)
}

/// Kernel computed with the vector placed in slot `slot` (0-based).
pub fn kernel_in_slot(t: &CurvTensor, slot: usize, tol: f64) -> DMatrix<f64> {
    assert!(slot < 4, "slot index out of range");
    let n = t.dim();
    let m = flatten_slot(t, slot);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return DMatrix::identity(n, n);
    }
    let null: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= tol * smax).collect();
    DMatrix::from_fn(n, null.len(), |r, c| u[(r, null[c])])
}

/// True iff every component mixing `span(basis1)` and `span(basis2)` vanishes
/// within `tol` (relative to the largest component in the adapted basis).
pub fn is_decomposable_wrt(t: &CurvTensor, basis1: &DMatrix<f64>, basis2: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let n = t.dim();
    let (k1, k2) = (basis1.ncols(), basis2.ncols());
    if basis1.nrows() != n || basis2.nrows() != n || k1 + k2 != n || k1 == 0 || k2 == 0 {
        return Err(Error::InvalidSplit);
    }
    let mut p = DMatrix::zeros(n, n);
    p.columns_mut(0, k1).copy_from(basis1);
    p.columns_mut(k1, k2).copy_from(basis2);
    if orthonormal_columns(&p, RANK_TOL).ncols() != n {
        return Err(Error::InvalidSplit);
    }
    let adapted = transform_all(Exec::default(), t.components(), n, 4, &p);
    let scale = max_abs(&adapted);
    let group = |i: usize| i < k1;
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let g = group(i);
                    if group(j) == g && group(k) == g && group(l) == g {
                        continue;
                    }
                    worst = worst.max(adapted[idx4(n, i, j, k, l)].abs());
                }
            }
        }
    }
    Ok(worst <= tol * scale)
}
