//! The manifolds `M_f` on `ℝ^{2p}` with coordinates `(x, y)` and metric
//! `g = Σ f_i f_j dx_i dx_j + 2 Σ dx_i dy_i`.
//!
//! The curvature lives on `span{∂_x}`: `R = R_H` for the Hessian `H` of `f`,
//! and `span{∂_y}` is the kernel of both `R` and `∇R`. Everything except the
//! ambient scalar curvature is therefore computed on the `p`-dimensional
//! `∂_x` block.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::poly::PolyFunction;
use crate::error::{Error, Result};
use crate::form::{check_dims, SymForm, RANK_TOL};
use crate::invariants::covariant_norm;
use crate::linalg::max_abs;
use crate::par::{map_indexed, Exec};
use crate::tensor::{build_canonical, idx4, CurvTensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyFunction", into = "PolyFunction")]
pub struct MfManifold {
    f: PolyFunction,
}

impl MfManifold {
    pub fn new(f: PolyFunction) -> Result<Self> {
        if f.num_vars() < 3 {
            return Err(Error::TooFewVariables(f.num_vars()));
        }
        Ok(Self { f })
    }

    pub fn p(&self) -> usize {
        self.f.num_vars()
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.p()
    }

    pub fn function(&self) -> &PolyFunction {
        &self.f
    }
}

impl TryFrom<PolyFunction> for MfManifold {
    type Error = Error;
    fn try_from(f: PolyFunction) -> Result<Self> {
        Self::new(f)
    }
}

impl From<MfManifold> for PolyFunction {
    fn from(m: MfManifold) -> Self {
        m.f
    }
}

/// Exact derivatives of `f` up to order three at a point.
struct Jet {
    p: usize,
    grad: Vec<f64>,
    hess: DMatrix<f64>,
    third: Vec<f64>,
}

impl Jet {
    fn new(f: &PolyFunction, x: &[f64], order: usize) -> Result<Self> {
        let p = f.num_vars();
        check_dims(p, x.len())?;
        let firsts = (0..p).map(|i| f.partial(i)).collect::<Result<Vec<_>>>()?;
        let grad = firsts.iter().map(|g| g.eval(x)).collect::<Result<Vec<_>>>()?;
        let mut hess = DMatrix::zeros(p, p);
        let mut third = vec![0.0; if order >= 3 { p * p * p } else { 0 }];
        for i in 0..p {
            for j in i..p {
                let fij = firsts[i].partial(j)?;
                let v = fij.eval(x)?;
                hess[(i, j)] = v;
                hess[(j, i)] = v;
                if order >= 3 {
                    for k in j..p {
                        let w = fij.partial(k)?.eval(x)?;
                        for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                            third[(a * p + b) * p + c] = w;
                        }
                    }
                }
            }
        }
        Ok(Self { p, grad, hess, third })
    }

    fn f3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[(i * self.p + j) * self.p + k]
    }
}

/// `H_{ij} = ∂²f/∂x_i∂x_j` at `x`.
pub fn hessian(f: &PolyFunction, x: &[f64]) -> Result<SymForm> {
    SymForm::new(Jet::new(f, x, 2)?.hess)
}

/// The `2p × 2p` metric in coordinates `(x_1..x_p, y_1..y_p)`.
pub fn mf_metric(m: &MfManifold, x: &[f64]) -> Result<SymForm> {
    let p = m.p();
    let jet = Jet::new(m.function(), x, 1)?;
    let mut g = DMatrix::zeros(2 * p, 2 * p);
    for i in 0..p {
        for j in 0..p {
            g[(i, j)] = jet.grad[i] * jet.grad[j];
        }
        g[(i, p + i)] = 1.0;
        g[(p + i, i)] = 1.0;
    }
    SymForm::new(g)
}

/// `R = R_H` on `span{∂_x}`.
pub fn mf_curvature(m: &MfManifold, x: &[f64]) -> Result<CurvTensor> {
    Ok(build_canonical(&hessian(m.function(), x)?))
}

/// Components `∇R(∂_i, ∂_j, ∂_k, ∂_l; ∂_n)` of the covariant derivative on
/// the `∂_x` fields, dense row-major with the derivative index last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deriv5Tensor {
    dim: usize,
    components: Vec<f64>,
}

impl Deriv5Tensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize, n: usize) -> f64 {
        let d = self.dim;
        self.components[idx4(d, i, j, k, l) * d + n]
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.components)
    }

    /// The 4-tensor `∇_{∂_n} R`.
    pub fn slice(&self, n: usize) -> CurvTensor {
        let d = self.dim;
        let comps = (0..d.pow(4)).map(|q| self.components[q * d + n]).collect();
        CurvTensor::from_trusted(d, comps)
    }
}

/// `∇R_{ijkl;n} = f_{iln} f_{jk} + f_{il} f_{jkn} − f_{ikn} f_{jl} − f_{ik} f_{jln}`.
pub fn mf_nabla_r(m: &MfManifold, x: &[f64]) -> Result<Deriv5Tensor> {
    let p = m.p();
    let jet = Jet::new(m.function(), x, 3)?;
    let h = &jet.hess;
    let mut c = vec![0.0; p.pow(5)];
    for i in 0..p {
        for j in 0..p {
            for k in 0..p {
                for l in 0..p {
                    let base = idx4(p, i, j, k, l) * p;
                    for n in 0..p {
                        c[base + n] = jet.f3(i, l, n) * h[(j, k)] + h[(i, l)] * jet.f3(j, k, n)
                            - jet.f3(i, k, n) * h[(j, l)]
                            - h[(i, k)] * jet.f3(j, l, n);
                    }
                }
            }
        }
    }
    Ok(Deriv5Tensor { dim: p, components: c })
}

/// `α_f = |Σ ε_i ε_j ε_k ε_l ε_n ∇R(X_i, X_j, X_k, X_l; X_n)²|` over a
/// pseudo-orthonormal basis `{X_i}` of the Hessian.
pub fn mf_alpha(m: &MfManifold, x: &[f64]) -> Result<f64> {
    let h = hessian(m.function(), x)?;
    let rank = h.rank(RANK_TOL);
    if rank < m.p() {
        return Err(Error::DegenerateHessian { rank, expected: m.p() });
    }
    covariant_norm(&h, mf_nabla_r(m, x)?.components())
}

/// [`mf_alpha`] over a list of points.
pub fn mf_alpha_batch(m: &MfManifold, points: &[Vec<f64>], exec: Exec) -> Vec<Result<f64>> {
    map_indexed(exec, points.len(), |i| mf_alpha(m, &points[i]))
}

/// Scalar curvature of the full `2p`-dimensional metric: `R_H` on the `∂_x`
/// slots, zero elsewhere, contracted twice with `g⁻¹`.
pub fn mf_scalar_curvature(m: &MfManifold, x: &[f64]) -> Result<f64> {
    let p = m.p();
    let g = mf_metric(m, x)?;
    let ginv = g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateForm { nullity: 1 })?;
    let r = mf_curvature(m, x)?;
    // all nonzero components have every index in 0..p
    let mut tau = 0.0;
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    tau += ginv[(a, d)] * ginv[(b, c)] * r.get(a, b, c, d);
                }
            }
        }
    }
    Ok(tau)
}
