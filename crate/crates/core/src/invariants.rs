//! Ricci and scalar curvature, sectional curvature, symmetric functions of
//! block invariants, and a harness testing invariance under sampled
//! structure-group elements.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::{check_dims, pseudo_orthonormalize, LinearMap, PseudoONBasis, SymForm};
use crate::linalg::{eigenvalue_real_parts, max_abs};
use crate::model::BlockModelSpace;
use crate::multilinear::transform_all;
use crate::par::{item_rng, map_indexed, Exec};
use crate::structure::sample_structure_group_element;
use crate::tensor::CurvTensor;

/// Smallest admissible `|φ(x,x)φ(y,y) − φ(x,y)²|` for a sectional curvature.
pub const PLANE_TOL: f64 = 1e-12;

fn ricci_with_basis(t: &CurvTensor, basis: &PseudoONBasis) -> SymForm {
    let n = t.dim();
    // Σ_i ε_i e_i ⊗ e_i, the trace weights for the middle two slots
    let w = &basis.vectors * basis.eta() * basis.vectors.transpose();
    let mut rho = DMatrix::zeros(n, n);
    for a in 0..n {
        for d in 0..n {
            let mut s = 0.0;
            for b in 0..n {
                for c in 0..n {
                    s += w[(b, c)] * t.get(a, b, c, d);
                }
            }
            rho[(a, d)] = s;
        }
    }
    SymForm::from_symmetric_part(&rho).expect("finite contraction of a finite tensor")
}

/// `ρ(x, y) = Σ_i ε_i R(x, e_i, e_i, y)` over a pseudo-orthonormal basis of
/// `φ`.
pub fn ricci(t: &CurvTensor, form: &SymForm) -> Result<SymForm> {
    check_dims(t.dim(), form.dim())?;
    let basis = pseudo_orthonormalize(form)?;
    Ok(ricci_with_basis(t, &basis))
}

/// `τ = Σ_j ε_j ρ(e_j, e_j)`.
pub fn scalar_curvature(t: &CurvTensor, form: &SymForm) -> Result<f64> {
    check_dims(t.dim(), form.dim())?;
    let basis = pseudo_orthonormalize(form)?;
    let rho = ricci_with_basis(t, &basis);
    Ok((0..basis.dim())
        .map(|j| {
            let e = basis.vector(j);
            basis.signs[j] * rho.eval(&e, &e)
        })
        .sum())
}

/// Components of `T` and `φ` on the frame `F` (columns), i.e. the data a
/// value function sees after a change of basis.
pub fn in_frame(t: &CurvTensor, form: &SymForm, frame: &DMatrix<f64>) -> Result<(CurvTensor, SymForm)> {
    check_dims(t.dim(), form.dim())?;
    check_dims(t.dim(), frame.nrows())?;
    let tf = t.restrict(frame)?;
    let ff = SymForm::from_symmetric_part(&(frame.transpose() * form.matrix() * frame))?;
    Ok((tf, ff))
}

/// `τ` computed from the components of `T` and `φ` on the frame `F`.
pub fn scalar_curvature_in_frame(t: &CurvTensor, form: &SymForm, frame: &DMatrix<f64>) -> Result<f64> {
    let (tf, ff) = in_frame(t, form, frame)?;
    scalar_curvature(&tf, &ff)
}

/// `κ(x, y) = T(x, y, y, x) / (φ(x,x)φ(y,y) − φ(x,y)²)`.
pub fn sectional_curvature(t: &CurvTensor, form: &SymForm, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    check_dims(t.dim(), form.dim())?;
    check_dims(t.dim(), x.len())?;
    check_dims(t.dim(), y.len())?;
    let den = form.eval(x, x) * form.eval(y, y) - form.eval(x, y).powi(2);
    if den.abs() <= PLANE_TOL {
        return Err(Error::DegeneratePlane { denominator: den });
    }
    Ok(t.eval(x, y, y, x) / den)
}

/// Sectional curvatures of the 2-dimensional blocks, read on the frame
/// columns sitting at each such block's coordinates.
pub fn block_sectional_curvatures(model: &BlockModelSpace, frame: &DMatrix<f64>) -> Result<Vec<f64>> {
    let t = model.tensor();
    let g = model.metric();
    (0..model.num_blocks())
        .filter(|&p| model.block_dim(p) == 2)
        .map(|p| {
            let o = model.offset(p);
            sectional_curvature(&t, &g, &frame.column(o).into_owned(), &frame.column(o + 1).into_owned())
        })
        .collect()
}

/// Eigenvalues of the Ricci operator `φ⁻¹ρ` (real parts, ascending). Unlike
/// the entries of `ρ` they do not depend on the basis.
pub fn ricci_operator_eigenvalues(t: &CurvTensor, form: &SymForm) -> Result<Vec<f64>> {
    let rho = ricci(t, form)?;
    let inv = form
        .matrix()
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateForm { nullity: 1 })?;
    eigenvalue_real_parts(&(inv * rho.matrix()))
}

/// Invariants reported for a block model: `τ`, the Ricci operator spectrum,
/// and symmetric functions of the sectional curvatures of its 2-dim blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub scalar_curvature: f64,
    pub ricci_eigenvalues: Vec<f64>,
    #[serde(flatten)]
    pub kappa: InvariantProfile,
}

pub fn model_profile(model: &BlockModelSpace) -> Result<ModelProfile> {
    model.ensure_nondegenerate()?;
    let t = model.tensor();
    let g = model.metric();
    let frame = DMatrix::identity(model.total_dim(), model.total_dim());
    Ok(ModelProfile {
        scalar_curvature: scalar_curvature(&t, &g)?,
        ricci_eigenvalues: ricci_operator_eigenvalues(&t, &g)?,
        kappa: symmetric_combine(&block_sectional_curvatures(model, &frame)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetricKind {
    Elementary,
    PowerSum,
    SortedTuple,
}

/// Per-block values with symmetric functions of them. `per_block` keeps the
/// input order; the other fields do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantProfile {
    pub per_block: Vec<f64>,
    /// `e_1, …, e_s`.
    pub elementary: Vec<f64>,
    /// `p_1, …, p_s`.
    pub power_sums: Vec<f64>,
}

impl InvariantProfile {
    /// Values in ascending order.
    pub fn sorted(&self) -> Vec<f64> {
        sorted(&self.per_block)
    }

    pub fn get(&self, kind: SymmetricKind) -> Vec<f64> {
        match kind {
            SymmetricKind::Elementary => self.elementary.clone(),
            SymmetricKind::PowerSum => self.power_sums.clone(),
            SymmetricKind::SortedTuple => self.sorted(),
        }
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Elementary symmetric polynomials and power sums of `values`. Inputs are
/// sorted first, so any permutation of them gives bitwise identical output.
pub fn symmetric_combine(values: &[f64]) -> InvariantProfile {
    let v = sorted(values);
    let s = v.len();
    let mut e = vec![0.0; s + 1];
    e[0] = 1.0;
    for (m, &x) in v.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    let power_sums = (1..=s as i32).map(|k| v.iter().map(|x| x.powi(k)).sum()).collect();
    InvariantProfile {
        per_block: values.to_vec(),
        elementary: e[1..].to_vec(),
        power_sums,
    }
}

/// Outcome of an invariance check. `pass` iff `max_deviation ≤ threshold`,
/// where `threshold = tol · max(1, max|reference|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub samples: usize,
    pub reference: Vec<f64>,
    pub max_deviation: f64,
    pub threshold: f64,
    /// Index of the sample attaining the maximum deviation.
    pub worst_sample: Option<usize>,
    pub pass: bool,
}

/// Evaluates `value_fn` on `frame` and on `A·frame` for each explicit
/// element `A`, reporting the largest deviation from the reference value.
pub fn check_invariance_with<F>(
    value_fn: F,
    frame: &DMatrix<f64>,
    elements: &[LinearMap],
    tol: f64,
    exec: Exec,
) -> Result<InvarianceReport>
where
    F: Fn(&DMatrix<f64>) -> Result<Vec<f64>> + Sync,
{
    let reference = value_fn(frame)?;
    let values = map_indexed(exec, elements.len(), |s| {
        check_dims(frame.nrows(), elements[s].dim())?;
        value_fn(&(elements[s].matrix() * frame))
    });
    summarize(reference, values, tol)
}

/// Draws `n_samples` elements with [`sample_structure_group_element`] (sample
/// `s` uses stream `s` of `seed`) and checks `value_fn` against them.
pub fn check_invariance<F>(
    value_fn: F,
    model: &BlockModelSpace,
    frame: &DMatrix<f64>,
    n_samples: usize,
    tol: f64,
    seed: u64,
    exec: Exec,
) -> Result<InvarianceReport>
where
    F: Fn(&DMatrix<f64>) -> Result<Vec<f64>> + Sync,
{
    check_dims(model.total_dim(), frame.nrows())?;
    let reference = value_fn(frame)?;
    let values = map_indexed(exec, n_samples, |s| {
        let a = sample_structure_group_element(model, &mut item_rng(seed, s))?;
        value_fn(&(a.matrix() * frame))
    });
    summarize(reference, values, tol)
}

fn summarize(reference: Vec<f64>, values: Vec<Result<Vec<f64>>>, tol: f64) -> Result<InvarianceReport> {
    let mut max_deviation = 0.0_f64;
    let mut worst_sample = None;
    let samples = values.len();
    for (s, v) in values.into_iter().enumerate() {
        let v = v?;
        check_dims(reference.len(), v.len())?;
        let dev = v.iter().zip(&reference).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if dev > max_deviation || worst_sample.is_none() {
            max_deviation = max_deviation.max(dev);
            worst_sample = Some(s);
        }
    }
    let threshold = tol * max_abs(&reference).max(1.0);
    Ok(InvarianceReport {
        samples,
        pass: max_deviation <= threshold,
        reference,
        max_deviation,
        threshold,
        worst_sample,
    })
}

/// `|Σ ε_i ε_j ε_k ε_l ε_n Ā_{ijkln}²|` with `Ā` the components of the
/// 5-tensor (dense, row-major, side `dim φ`) in a pseudo-orthonormal basis.
pub fn covariant_norm(form: &SymForm, components: &[f64]) -> Result<f64> {
    let basis = pseudo_orthonormalize(form)?;
    covariant_norm_in_basis(&basis, components)
}

/// [`covariant_norm`] evaluated in a caller-supplied pseudo-orthonormal basis.
pub fn covariant_norm_in_basis(basis: &PseudoONBasis, components: &[f64]) -> Result<f64> {
    let n = basis.dim();
    check_dims(n.pow(5), components.len())?;
    let bar = transform_all(Exec::default(), components, n, 5, &basis.vectors);
    let eps = &basis.signs;
    let mut total = 0.0;
    for (flat, v) in bar.iter().enumerate() {
        let mut rest = flat;
        let mut sign = 1.0;
        for _ in 0..5 {
            sign *= eps[rest % n];
            rest /= n;
        }
        total += sign * v * v;
    }
    Ok(total.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_matrix, random_symmetric_with_signature};
    use crate::model::Block;
    use crate::structure::{block_swap, random_pseudo_orthonormal_basis, wreath_to_matrix};
    use crate::tensor::{build_canonical, direct_sum};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kappa_model(k1: f64, k2: f64) -> BlockModelSpace {
        BlockModelSpace::new(vec![
            Block::new(SymForm::identity(2), k1).unwrap(),
            Block::new(SymForm::identity(2), k2).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn zero_tensor_has_zero_curvatures() {
        let f = SymForm::diagonal(&[1.0, -1.0, 2.0]).unwrap();
        let t = CurvTensor::zeros(3);
        assert_eq!(max_abs_matrix(ricci(&t, &f).unwrap().matrix()), 0.0);
        assert_eq!(scalar_curvature(&t, &f).unwrap(), 0.0);
    }

    #[test]
    fn canonical_ricci_and_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (p, q) in [(3, 0), (2, 2), (1, 4), (0, 5), (3, 3)] {
            let n = p + q;
            let f = SymForm::new(random_symmetric_with_signature(&mut rng, p, q, 0)).unwrap();
            let t = build_canonical(&f);
            let rho = ricci(&t, &f).unwrap();
            let diff = rho.matrix() - f.matrix() * (n as f64 - 1.0);
            assert!(max_abs_matrix(&diff) <= 1e-9, "{diff}");
            let tau = scalar_curvature(&t, &f).unwrap();
            assert!((tau - (n * (n - 1)) as f64).abs() <= 1e-9, "{tau}");
        }
    }

    #[test]
    fn direct_sum_scalar_is_additive() {
        let f1 = SymForm::diagonal(&[1.0, -1.0]).unwrap();
        let f2 = SymForm::diagonal(&[2.0, 1.0, 1.0]).unwrap();
        let t = direct_sum(&[build_canonical(&f1), build_canonical(&f2)]).unwrap();
        let g = SymForm::diagonal(&[1.0, -1.0, 2.0, 1.0, 1.0]).unwrap();
        let tau = scalar_curvature(&t, &g).unwrap();
        assert!((tau - 8.0).abs() < 1e-12);
        let rho = ricci(&t, &g).unwrap();
        assert!((rho.get(0, 0) - 1.0).abs() < 1e-12 && (rho.get(2, 2) - 4.0).abs() < 1e-12);
        assert_eq!(rho.get(0, 2), 0.0);
    }

    #[test]
    fn sectional_of_canonical_is_one() {
        let f = SymForm::identity(4);
        let t = build_canonical(&f);
        let x = DVector::from_vec(vec![1.0, 2.0, 0.0, -1.0]);
        let y = DVector::from_vec(vec![0.0, 1.0, 3.0, 1.0]);
        assert!((sectional_curvature(&t, &f, &x, &y).unwrap() - 1.0).abs() < 1e-12);
        assert!((sectional_curvature(&t.scaled(2.5), &f, &x, &y).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn sectional_independent_of_spanning_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = SymForm::new(random_symmetric_with_signature(&mut rng, 1, 1, 0)).unwrap();
        let t = build_canonical(&f).scaled(3.0);
        let x = DVector::from_vec(vec![1.0, 0.3]);
        let y = DVector::from_vec(vec![-0.2, 1.0]);
        let x2 = &x * 2.0 - &y * 0.5;
        let y2 = &x + &y * 3.0;
        let a = sectional_curvature(&t, &f, &x, &y).unwrap();
        let b = sectional_curvature(&t, &f, &x2, &y2).unwrap();
        assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn degenerate_plane_is_rejected() {
        let f = SymForm::identity(3);
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let r = sectional_curvature(&build_canonical(&f), &f, &x, &(&x * 2.0));
        assert!(matches!(r, Err(Error::DegeneratePlane { .. })));
    }

    #[test]
    fn elementary_symmetric_hand_values() {
        let p = symmetric_combine(&[1.0, 2.0, 3.0]);
        assert_eq!(p.elementary, vec![6.0, 11.0, 6.0]);
        assert_eq!(p.power_sums, vec![6.0, 14.0, 36.0]);
        let single = symmetric_combine(&[4.5]);
        assert_eq!(single.elementary, vec![4.5]);
        assert_eq!(single.power_sums, vec![4.5]);
    }

    #[test]
    fn shuffled_input_gives_identical_profile() {
        let a = symmetric_combine(&[0.1, -3.7, 2.25, 1e-3]);
        let b = symmetric_combine(&[2.25, 1e-3, 0.1, -3.7]);
        assert_eq!(a.elementary, b.elementary);
        assert_eq!(a.power_sums, b.power_sums);
        assert_eq!(a.sorted(), b.sorted());
        assert_ne!(a.per_block, b.per_block);
    }

    #[test]
    fn profile_json_shape() {
        let s = serde_json::to_string(&symmetric_combine(&[2.0, 5.0])).unwrap();
        assert_eq!(
            s,
            r#"{"per_block":[2.0,5.0],"elementary":[7.0,10.0],"power_sums":[7.0,29.0]}"#
        );
    }

    #[test]
    fn scalar_curvature_passes_harness() {
        let m = BlockModelSpace::from_forms(vec![
            SymForm::diagonal(&[1.0, -1.0, 1.0]).unwrap(),
            SymForm::diagonal(&[-1.0, 1.0, -1.0]).unwrap(),
            SymForm::diagonal(&[1.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let t = m.tensor();
        let g = m.metric();
        let frame = DMatrix::identity(8, 8);
        let rep = check_invariance(
            |f| Ok(vec![scalar_curvature_in_frame(&t, &g, f)?]),
            &m,
            &frame,
            30,
            1e-8,
            7,
            Exec::default(),
        )
        .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.samples, 30);
    }

    #[test]
    fn ordered_difference_is_a_negative_control() {
        let m = kappa_model(2.0, 5.0);
        let frame = DMatrix::identity(4, 4);
        let swap = wreath_to_matrix(&block_swap(&m, 0, 1).unwrap(), &m).unwrap();
        let diff = |f: &DMatrix<f64>| {
            let k = block_sectional_curvatures(&m, f)?;
            Ok(vec![k[0] - k[1]])
        };
        let rep = check_invariance_with(diff, &frame, std::slice::from_ref(&swap), 1e-8, Exec::default()).unwrap();
        assert!(!rep.pass);
        assert!((rep.reference[0] + 3.0).abs() < 1e-12);
        let swapped = block_sectional_curvatures(&m, &(swap.matrix() * &frame)).unwrap();
        assert!((swapped[0] - 5.0).abs() < 1e-9 && (swapped[1] - 2.0).abs() < 1e-9);

        let sym = |f: &DMatrix<f64>| Ok(symmetric_combine(&block_sectional_curvatures(&m, f)?).elementary);
        let rep = check_invariance_with(sym, &frame, &[swap], 1e-8, Exec::default()).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn covariant_norm_single_entry() {
        let mut a = vec![0.0; 3usize.pow(5)];
        assert_eq!(covariant_norm(&SymForm::identity(3), &a).unwrap(), 0.0);
        a[17] = -1.5;
        assert_eq!(covariant_norm(&SymForm::identity(3), &a).unwrap(), 2.25);
    }

    #[test]
    fn covariant_norm_is_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let f = SymForm::new(random_symmetric_with_signature(&mut rng, 2, 1, 0)).unwrap();
        let a: Vec<f64> = (0..243).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let b1 = random_pseudo_orthonormal_basis(&f, &mut rng).unwrap();
        let b2 = random_pseudo_orthonormal_basis(&f, &mut rng).unwrap();
        let n1 = covariant_norm_in_basis(&b1, &a).unwrap();
        let n2 = covariant_norm_in_basis(&b2, &a).unwrap();
        assert!((n1 - n2).abs() <= 1e-8 * n1.abs().max(1.0));
        let neg = covariant_norm(&f.neg(), &a).unwrap();
        let pos = covariant_norm(&f, &a).unwrap();
        assert!((neg - pos).abs() <= 1e-12 * pos.max(1.0));
    }

    #[test]
    fn covariant_norm_checks_length() {
        assert!(matches!(
            covariant_norm(&SymForm::identity(2), &[0.0; 31]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn profile_of_kappa_model() {
        let p = model_profile(&kappa_model(2.0, 5.0)).unwrap();
        assert!((p.kappa.elementary[0] - 7.0).abs() < 1e-12);
        assert!((p.kappa.elementary[1] - 10.0).abs() < 1e-12);
        assert!((p.scalar_curvature - 14.0).abs() < 1e-12);
        let single = BlockModelSpace::from_forms(vec![SymForm::identity(4)]).unwrap();
        let p = model_profile(&single).unwrap();
        assert!((p.scalar_curvature - 12.0).abs() < 1e-12);
        assert!(p.ricci_eigenvalues.iter().all(|e| (e - 3.0).abs() < 1e-12));
        assert!(p.kappa.per_block.is_empty());
    }

    #[test]
    fn profile_rejects_degenerate_block() {
        let m = BlockModelSpace::from_forms(vec![SymForm::diagonal(&[1.0, 0.0]).unwrap()]).unwrap();
        assert!(matches!(model_profile(&m), Err(Error::DegenerateForm { .. })));
    }
}
