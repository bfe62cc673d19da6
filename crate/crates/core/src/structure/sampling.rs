//! Random elements of `G_φ`, para-isometries and unimodular plane maps.
//!
//! Isometries are built in a pseudo-orthonormal basis with Gram matrix
//! `η = diag(ε)`: a generator `X = ηK` with `K` antisymmetric satisfies
//! `Xᵀη + ηX = 0`, so `S = D·exp(X)` (with `D` a random diagonal sign matrix)
//! satisfies `Sᵀ η S = η`, and `A = E S E⁻¹` is a `φ`-isometry.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::form::{pseudo_orthonormalize, LinearMap, PseudoONBasis, SymForm, RANK_TOL};

/// Scale applied to the standard-normal Lie-algebra entries.
pub const LIE_SCALE: f64 = 0.5;

/// `E⁻¹ = η Eᵀ φ` for a pseudo-orthonormal basis `E` of `φ`.
pub(crate) fn basis_inverse(basis: &PseudoONBasis, form: &SymForm) -> DMatrix<f64> {
    basis.eta() * basis.vectors.transpose() * form.matrix()
}

/// Random `S` with `Sᵀ η S = η`.
pub(crate) fn random_eta_isometry<R: Rng + ?Sized>(rng: &mut R, signs: &[f64]) -> DMatrix<f64> {
    let n = signs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = LIE_SCALE * rng.sample::<f64, _>(StandardNormal);
            k[(i, j)] = v;
            k[(j, i)] = -v;
        }
    }
    let mut x = k;
    for (i, &s) in signs.iter().enumerate() {
        x.row_mut(i).scale_mut(s);
    }
    let mut s = x.exp();
    for i in 0..n {
        if rng.random_bool(0.5) {
            s.row_mut(i).neg_mut();
        }
    }
    s
}

/// A random `A` with `A*φ = φ`.
pub fn sample_isometry<R: Rng + ?Sized>(form: &SymForm, rng: &mut R) -> Result<LinearMap> {
    let basis = pseudo_orthonormalize(form)?;
    let s = random_eta_isometry(rng, &basis.signs);
    LinearMap::new(&basis.vectors * s * basis_inverse(&basis, form))
}

/// The causal-type swap `e⁺_i ↔ e⁻_i` in a pseudo-orthonormal basis, which
/// satisfies `A*φ = −φ`.
pub fn sample_para_isometry(form: &SymForm) -> Result<LinearMap> {
    let sig = form.signature(RANK_TOL);
    if sig.zero > 0 {
        return Err(Error::DegenerateForm { nullity: sig.zero });
    }
    if !sig.is_balanced() {
        return Err(Error::NotBalanced {
            plus: sig.plus,
            minus: sig.minus,
        });
    }
    let basis = pseudo_orthonormalize(form)?;
    let n = form.dim();
    let m = n / 2;
    let mut s = DMatrix::zeros(n, n);
    for i in 0..m {
        s[(m + i, i)] = 1.0;
        s[(i, m + i)] = 1.0;
    }
    LinearMap::new(&basis.vectors * s * basis_inverse(&basis, form))
}

/// Random 2×2 map with `|det| = 1`: `R(θ₁)·diag(s, 1/s)·R(θ₂)`, times a
/// reflection with probability ½, with `ln s ~ N(0, LIE_SCALE²)`.
pub fn sample_unimodular_2<R: Rng + ?Sized>(rng: &mut R) -> DMatrix<f64> {
    let rot = |t: f64| DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
    let t1 = rng.random_range(0.0..std::f64::consts::TAU);
    let t2 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (LIE_SCALE * rng.sample::<f64, _>(StandardNormal)).exp();
    let mut m = rot(t1) * DMatrix::from_row_slice(2, 2, &[s, 0.0, 0.0, 1.0 / s]) * rot(t2);
    if rng.random_bool(0.5) {
        m.column_mut(1).neg_mut();
    }
    m
}

/// A random element of `G_{R_φ}` for a nondegenerate block form: a
/// unimodular map in dimension 2, otherwise an isometry composed with the
/// para-isometry with probability ½ when the signature is balanced.
pub(crate) fn sample_block_member<R: Rng + ?Sized>(form: &SymForm, rng: &mut R) -> Result<DMatrix<f64>> {
    let sig = form.signature(RANK_TOL);
    if sig.zero > 0 {
        return Err(Error::DegenerateForm { nullity: sig.zero });
    }
    if form.dim() == 2 {
        return Ok(sample_unimodular_2(rng));
    }
    let iso = sample_isometry(form, rng)?;
    if sig.is_balanced() && rng.random_bool(0.5) {
        let para = sample_para_isometry(form)?;
        Ok(iso.matrix() * para.matrix())
    } else {
        Ok(iso.into_matrix())
    }
}

/// A pseudo-orthonormal basis of `φ` mixed by a random `η`-isometry, so that
/// two calls produce unrelated bases of the same form.
pub fn random_pseudo_orthonormal_basis<R: Rng + ?Sized>(form: &SymForm, rng: &mut R) -> Result<PseudoONBasis> {
    let basis = pseudo_orthonormalize(form)?;
    let s = random_eta_isometry(rng, &basis.signs);
    Ok(basis.mixed(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_matrix, random_symmetric_with_signature};
    use crate::structure::membership::{classify_canonical_member, is_member, Verdict};
    use crate::tensor::build_canonical;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn euclidean_sample_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = sample_isometry(&SymForm::identity(5), &mut rng).unwrap();
        let e = a.matrix().transpose() * a.matrix() - DMatrix::identity(5, 5);
        assert!(max_abs_matrix(&e) < 1e-9);
    }

    #[test]
    fn lorentz_generator_exponentiates_to_boost() {
        let s = 0.8_f64;
        let x = DMatrix::from_row_slice(2, 2, &[0.0, s, s, 0.0]);
        let eta = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        // x lies in o(1,1)
        assert!(max_abs_matrix(&(x.transpose() * &eta + &eta * &x)) == 0.0);
        let e = x.exp();
        let expected = DMatrix::from_row_slice(2, 2, &[s.cosh(), s.sinh(), s.sinh(), s.cosh()]);
        assert!(max_abs_matrix(&(e - expected)) < 1e-14);
    }

    #[test]
    fn sampled_isometries_preserve_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (p, q) in [(3, 0), (2, 2), (1, 4), (4, 2)] {
            let f = SymForm::new(random_symmetric_with_signature(&mut rng, p, q, 0)).unwrap();
            for _ in 0..10 {
                let a = sample_isometry(&f, &mut rng).unwrap();
                let res = max_abs_matrix(&(f.pullback(&a).unwrap().matrix() - f.matrix()));
                assert!(res <= 1e-9 * f.max_abs(), "{res}");
                assert!(is_member(&a, &build_canonical(&f), 1e-8).unwrap().member);
            }
        }
    }

    #[test]
    fn isometry_sampling_rejects_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = SymForm::diagonal(&[1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            sample_isometry(&f, &mut rng),
            Err(Error::DegenerateForm { .. })
        ));
    }

    #[test]
    fn para_isometry_two_dim_is_swap() {
        let a = sample_para_isometry(&SymForm::diagonal(&[1.0, -1.0]).unwrap()).unwrap();
        assert_eq!(a.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn para_isometry_four_dim() {
        let f = SymForm::diagonal(&[1.0, 1.0, -1.0, -1.0]).unwrap();
        let a = sample_para_isometry(&f).unwrap();
        let res = max_abs_matrix(&(f.pullback(&a).unwrap().matrix() + f.matrix()));
        assert!(res <= 1e-12);
        let twice = a.compose(&a).unwrap();
        assert_eq!(
            classify_canonical_member(&twice, &f, 1e-8).unwrap().verdict,
            Verdict::Isometry
        );
    }

    #[test]
    fn para_isometry_needs_balance() {
        let f = SymForm::diagonal(&[1.0, 1.0, -1.0]).unwrap();
        assert_eq!(sample_para_isometry(&f), Err(Error::NotBalanced { plus: 2, minus: 1 }));
    }

    #[test]
    fn unimodular_samples_have_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let m = sample_unimodular_2(&mut rng);
            assert!((m.determinant().abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_bases_differ_but_stay_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let f = SymForm::new(random_symmetric_with_signature(&mut rng, 2, 3, 0)).unwrap();
        let a = random_pseudo_orthonormal_basis(&f, &mut rng).unwrap();
        let b = random_pseudo_orthonormal_basis(&f, &mut rng).unwrap();
        assert!(a.gram_residual(&f) < 1e-10);
        assert!(b.gram_residual(&f) < 1e-10);
        assert!(max_abs_matrix(&(&a.vectors - &b.vectors)) > 1e-3);
    }
}
