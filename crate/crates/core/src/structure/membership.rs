use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::form::{check_dims, LinearMap, SymForm, RANK_TOL};
use crate::linalg::max_abs_matrix;
use crate::tensor::{pullback, CurvTensor};

/// Outcome of `is_member`: the verdict and the relative residual
/// `max|A*T − T| / max|T|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub residual: f64,
}

/// `A ∈ G_T` iff `max|A*T − T| ≤ tol · max|T|`.
pub fn is_member(a: &LinearMap, t: &CurvTensor, tol: f64) -> Result<Membership> {
    check_dims(t.dim(), a.dim())?;
    a.ensure_invertible()?;
    let pulled = pullback(a, t)?;
    let scale = t.max_abs();
    let diff = pulled.max_abs_diff(t);
    let residual = if scale == 0.0 { diff } else { diff / scale };
    Ok(Membership {
        member: residual <= tol,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `A*φ = φ` (rank ≥ 3).
    Isometry,
    /// `A*φ = −φ` (rank ≥ 3, balanced signature only).
    ParaIsometry,
    /// Rank 2: `A` preserves `ker φ` and the induced map has `|det| = 1`.
    UnimodularRank2,
    /// Rank ≤ 1: `R_φ = 0`, every invertible map is a member.
    TrivialTensor,
    NonMember,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub verdict: Verdict,
    pub residual: f64,
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        self.verdict != Verdict::NonMember
    }
}

/// Classify `A` against the structure group of `R_φ` using the form alone:
///
/// * rank ≥ 3: member iff `A*φ = ±φ`;
/// * rank 2: quotient by `ker φ`, member iff the kernel is preserved and the
///   induced map on `V / ker φ` has `|det| = 1`;
/// * rank ≤ 1: `R_φ = 0`.
pub fn classify_canonical_member(a: &LinearMap, form: &SymForm, tol: f64) -> Result<MembershipVerdict> {
    check_dims(form.dim(), a.dim())?;
    a.ensure_invertible()?;
    let sig = form.signature(RANK_TOL);
    let verdict = match sig.rank() {
        0 | 1 => MembershipVerdict {
            verdict: Verdict::TrivialTensor,
            residual: 0.0,
        },
        2 => classify_rank_two(a, form, tol),
        _ => {
            let scale = form.max_abs();
            let pulled = form.pullback(a)?;
            let iso = max_abs_matrix(&(pulled.matrix() - form.matrix())) / scale;
            let para = max_abs_matrix(&(pulled.matrix() + form.matrix())) / scale;
            if iso <= tol {
                MembershipVerdict {
                    verdict: Verdict::Isometry,
                    residual: iso,
                }
            } else if para <= tol {
                MembershipVerdict {
                    verdict: Verdict::ParaIsometry,
                    residual: para,
                }
            } else {
                MembershipVerdict {
                    verdict: Verdict::NonMember,
                    residual: iso.min(para),
                }
            }
        }
    };
    Ok(verdict)
}

fn classify_rank_two(a: &LinearMap, form: &SymForm, tol: f64) -> MembershipVerdict {
    let n = form.dim();
    let eig = form.matrix().clone().symmetric_eigen();
    let smax = eig.eigenvalues.amax();
    // orthogonal change of basis: range(φ) first, ker(φ) after
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].abs().total_cmp(&eig.eigenvalues[i].abs()));
    let p = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    debug_assert!(eig.eigenvalues[order[2.min(n - 1)]].abs() <= RANK_TOL * smax || n == 2);
    let adapted = p.transpose() * a.matrix() * &p;
    let scale = max_abs_matrix(&adapted);
    let leak = if n > 2 {
        max_abs_matrix(&adapted.view((0, 2), (2, n - 2)).into_owned()) / scale
    } else {
        0.0
    };
    let det = adapted.view((0, 0), (2, 2)).determinant();
    let residual = leak.max((det.abs() - 1.0).abs());
    MembershipVerdict {
        verdict: if residual <= tol {
            Verdict::UnimodularRank2
        } else {
            Verdict::NonMember
        },
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::SymForm;
    use crate::tensor::{build_canonical, direct_sum};

    fn rot3(t: f64) -> LinearMap {
        let (c, s) = (t.cos(), t.sin());
        LinearMap::from_rows(&[vec![c, -s, 0.0], vec![s, c, 0.0], vec![0.0, 0.0, 1.0]]).unwrap()
    }

    #[test]
    fn identity_is_member_with_zero_residual() {
        let r = build_canonical(&SymForm::diagonal(&[1.0, -1.0, 2.0]).unwrap());
        let m = is_member(&LinearMap::identity(3), &r, 1e-8).unwrap();
        assert!(m.member);
        assert_eq!(m.residual, 0.0);
    }

    fn two_plane_model() -> CurvTensor {
        direct_sum(&[
            build_canonical(&SymForm::identity(2)),
            build_canonical(&SymForm::identity(2)),
        ])
        .unwrap()
    }

    #[test]
    fn in_block_shear_is_member() {
        // det = 1 on a 2-dim block, so the shear lies in G_{R_φ} of that block
        let a = LinearMap::from_rows(&[
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let m = is_member(&a, &two_plane_model(), 1e-8).unwrap();
        assert!(m.member);
        assert!(m.residual < 1e-15);
    }

    #[test]
    fn cross_block_shear_is_not_member() {
        // B e3 = e1 + e3: (B*R)(e3,e2,e2,e3) = R(e1,e2,e2,e1) = 1 but R(e3,e2,e2,e3) = 0
        let b = LinearMap::from_rows(&[
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let t = two_plane_model();
        let m = is_member(&b, &t, 1e-8).unwrap();
        assert!(!m.member);
        let direct = pullback(&b, &t).unwrap().max_abs_diff(&t);
        assert_eq!(m.residual, direct);
        assert!(m.residual >= 1.0);
    }

    #[test]
    fn singular_map_rejected() {
        let r = build_canonical(&SymForm::identity(2));
        let a = LinearMap::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(is_member(&a, &r, 1e-8).is_err());
        assert!(classify_canonical_member(&a, &SymForm::identity(2), 1e-8).is_err());
    }

    #[test]
    fn rotation_is_isometry() {
        let v = classify_canonical_member(&rot3(0.7), &SymForm::identity(3), 1e-8).unwrap();
        assert_eq!(v.verdict, Verdict::Isometry);
    }

    #[test]
    fn balanced_swap_is_para_isometry() {
        let f = SymForm::diagonal(&[1.0, 1.0, -1.0, -1.0]).unwrap();
        let a = LinearMap::from_rows(&[
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
        ])
        .unwrap();
        let v = classify_canonical_member(&a, &f, 1e-8).unwrap();
        assert_eq!(v.verdict, Verdict::ParaIsometry);
        assert!(is_member(&a, &build_canonical(&f), 1e-8).unwrap().member);
    }

    #[test]
    fn rank_two_unimodular() {
        let a = LinearMap::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let v = classify_canonical_member(&a, &SymForm::identity(2), 1e-8).unwrap();
        assert_eq!(v.verdict, Verdict::UnimodularRank2);
        assert!(
            is_member(&a, &build_canonical(&SymForm::identity(2)), 1e-8)
                .unwrap()
                .member
        );
        let b = LinearMap::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(
            classify_canonical_member(&b, &SymForm::identity(2), 1e-8)
                .unwrap()
                .verdict,
            Verdict::NonMember
        );
    }

    #[test]
    fn rank_two_in_higher_dimension_uses_quotient() {
        let f = SymForm::diagonal(&[1.0, 1.0, 0.0]).unwrap();
        let r = build_canonical(&f);
        // unimodular on span{e1,e2}, arbitrary on the kernel direction and
        // with a kernel-valued shear C
        let a = LinearMap::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 1.0 / 3.0, 0.0], vec![0.4, -2.0, 7.0]]).unwrap();
        assert_eq!(
            classify_canonical_member(&a, &f, 1e-8).unwrap().verdict,
            Verdict::UnimodularRank2
        );
        assert!(is_member(&a, &r, 1e-8).unwrap().member);
        // moving the kernel out of itself breaks membership
        let b = LinearMap::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(
            classify_canonical_member(&b, &f, 1e-8).unwrap().verdict,
            Verdict::NonMember
        );
        assert!(!is_member(&b, &r, 1e-8).unwrap().member);
    }

    #[test]
    fn rank_one_is_trivial() {
        let f = SymForm::diagonal(&[1.0, 0.0, 0.0]).unwrap();
        let a = LinearMap::from_rows(&[vec![1.0, 5.0, 0.0], vec![0.0, 2.0, 0.0], vec![1.0, 0.0, 1.0]]).unwrap();
        assert_eq!(
            classify_canonical_member(&a, &f, 1e-8).unwrap().verdict,
            Verdict::TrivialTensor
        );
        assert!(is_member(&a, &build_canonical(&f), 1e-8).unwrap().member);
    }
}
