//! Reference computations that avoid the library code paths they check:
//! closed-form components, SVD null spaces, inverse-metric contractions and
//! finite differences.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::mf::{mf_curvature, MfManifold};
use crate::model::BlockModelSpace;

/// `φ_il φ_jk − φ_ik φ_jl`.
pub fn canonical_component(phi: &DMatrix<f64>, i: usize, j: usize, k: usize, l: usize) -> f64 {
    phi[(i, l)] * phi[(j, k)] - phi[(i, k)] * phi[(j, l)]
}

/// Largest violation of antisymmetry, pair symmetry and the Bianchi sum over
/// all index tuples, divided by the largest component.
pub fn identity_residual(n: usize, c: &[f64]) -> f64 {
    let at = |i: usize, j: usize, k: usize, l: usize| c[((i * n + j) * n + k) * n + l];
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    worst = worst
                        .max((at(i, j, k, l) + at(j, i, k, l)).abs())
                        .max((at(i, j, k, l) - at(k, l, i, j)).abs())
                        .max((at(i, j, k, l) + at(i, k, l, j) + at(i, l, j, k)).abs());
                }
            }
        }
    }
    worst / scale
}

/// Orthonormal basis of `{v : φ v = 0}` from the SVD of `φ`.
pub fn null_space(phi: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = phi.nrows();
    let svd = phi.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    let null: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= rel_tol * smax).collect();
    DMatrix::from_fn(n, null.len(), |r, c| vt[(null[c], r)])
}

/// `ρ_ad = Σ φ^{bc} R_abcd` with `R` from the closed form and `φ⁻¹` by LU.
pub fn ricci_of_canonical(phi: &DMatrix<f64>) -> DMatrix<f64> {
    let n = phi.nrows();
    let inv = phi.clone().lu().try_inverse().expect("nondegenerate form");
    DMatrix::from_fn(n, n, |a, d| {
        let mut s = 0.0;
        for b in 0..n {
            for c in 0..n {
                s += inv[(b, c)] * canonical_component(phi, a, b, c, d);
            }
        }
        s
    })
}

/// `τ = Σ φ^{ad} ρ_ad`.
pub fn scalar_of_canonical(phi: &DMatrix<f64>) -> f64 {
    let inv = phi.clone().lu().try_inverse().expect("nondegenerate form");
    let rho = ricci_of_canonical(phi);
    inv.component_mul(&rho).sum()
}

/// `|H^{ii'} H^{jj'} H^{kk'} H^{ll'} H^{nn'} A_{ijkln} A_{i'j'k'l'n'}|`.
pub fn alpha_by_inverse(h: &DMatrix<f64>, a: &[f64]) -> f64 {
    let p = h.nrows();
    let g = h.clone().lu().try_inverse().expect("nondegenerate Hessian");
    // raise one index at a time: B = A ×_1 g ×_2 g … ×_5 g, then Σ A·B
    let mut b = a.to_vec();
    let mut stride = 1;
    for _ in 0..5 {
        let mut next = vec![0.0; b.len()];
        for (flat, out) in next.iter_mut().enumerate() {
            let idx = (flat / stride) % p;
            let base = flat - idx * stride;
            *out = (0..p).map(|q| g[(idx, q)] * b[base + q * stride]).sum();
        }
        b = next;
        stride *= p;
    }
    a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>().abs()
}

/// Central differences of `R_H` in each coordinate direction, laid out like
/// `mf_nabla_r` (derivative index last).
pub fn nabla_r_fd(m: &MfManifold, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let p = m.p();
    let mut out = vec![0.0; p.pow(5)];
    for n in 0..p {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[n] += h;
        xm[n] -= h;
        let rp = mf_curvature(m, &xp)?;
        let rm = mf_curvature(m, &xm)?;
        for (q, (a, b)) in rp.components().iter().zip(rm.components()).enumerate() {
            out[q * p + n] = (a - b) / (2.0 * h);
        }
    }
    Ok(out)
}

/// Largest raw matrix entry coupling coordinates of blocks whose labels
/// differ.
pub fn cross_label_leakage(a: &DMatrix<f64>, model: &BlockModelSpace, label: &[usize]) -> f64 {
    let n = model.total_dim();
    let mut leak = 0.0_f64;
    for r in 0..n {
        for c in 0..n {
            if label[model.block_of(r)] != label[model.block_of(c)] {
                leak = leak.max(a[(r, c)].abs());
            }
        }
    }
    leak
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_diagonal() {
        let phi = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, -2.0]));
        let k = null_space(&phi, 1e-10);
        assert_eq!(k.ncols(), 1);
        assert!((k[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_contraction_single_entry() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, -1.0, 1.0]));
        let mut a = vec![0.0; 243];
        // index (0,0,0,0,1): four factors 1/2 and one −1
        a[1] = 4.0;
        assert!((alpha_by_inverse(&h, &a) - 1.0).abs() < 1e-15);
    }
}
