//! Property tests over seeded random inputs.

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use curvlab::acceptance::oracle;
use curvlab::invariants::{
    block_sectional_curvatures, ricci_operator_eigenvalues, scalar_curvature, symmetric_combine,
};
use curvlab::linalg::{
    max_principal_angle, orthonormal_columns, random_normal_matrix, random_symmetric_with_signature,
};
use curvlab::mf::{mf_nabla_r, MfManifold, PolyFunction};
use curvlab::structure::{
    cross_class_leakage, sample_structure_group_element, sample_wreath_element, wreath_compose, wreath_to_matrix,
};
use curvlab::{
    allowed_block_permutations, build_canonical, extract_permutation, kernel, pullback, Block, BlockModelSpace,
    CurvTensor, LinearMap, SymForm, WreathElement, RANK_TOL,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_form(rng: &mut ChaCha8Rng, plus: usize, minus: usize, zero: usize) -> SymForm {
    SymForm::new(random_symmetric_with_signature(rng, plus, minus, zero)).unwrap()
}

/// Well-conditioned invertible map `I + 0.3 G`, rejected until `|det| > 0.1`.
fn random_map(rng: &mut ChaCha8Rng, n: usize) -> LinearMap {
    loop {
        let m = DMatrix::identity(n, n) + random_normal_matrix(rng, n, n, 0.3);
        if m.determinant().abs() > 0.1 {
            return LinearMap::new(m).unwrap();
        }
    }
}

/// Two to four nondegenerate blocks of dimension 2 or 3 with repeated shapes
/// so that nontrivial block permutations occur.
fn random_model(rng: &mut ChaCha8Rng) -> BlockModelSpace {
    let shapes = [(2, 0), (1, 1), (2, 1)];
    let k = rng.random_range(2..=4);
    let blocks = (0..k)
        .map(|_| {
            let (p, q) = shapes[rng.random_range(0..shapes.len())];
            let scale = if rng.random_bool(0.5) {
                1.0
            } else {
                rng.random_range(0.5..3.0)
            };
            Block::new(random_form(rng, p, q, 0), scale).unwrap()
        })
        .collect();
    BlockModelSpace::new(blocks).unwrap()
}

fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn canonical_tensor_satisfies_identities(seed in any::<u64>(), p in 0usize..4, q in 0usize..4, z in 0usize..3) {
        prop_assume!(p + q + z >= 1);
        let mut r = rng(seed);
        let phi = random_form(&mut r, p, q, z);
        let t = build_canonical(&phi);
        prop_assert!(t.validate(1e-12).pass);
        prop_assert!(oracle::identity_residual(t.dim(), t.components()) <= 1e-12 * t.max_abs().max(1.0));
    }

    #[test]
    fn pullback_reverses_composition(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let t = build_canonical(&random_form(&mut r, n, 0, 0));
        let a = random_map(&mut r, n);
        let b = random_map(&mut r, n);
        let lhs = pullback(&a.compose(&b).unwrap(), &t).unwrap();
        let rhs = pullback(&b, &pullback(&a, &t).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn pullback_of_canonical_is_canonical_of_pullback(seed in any::<u64>(), n in 2usize..5, q in 0usize..3) {
        let mut r = rng(seed);
        let phi = random_form(&mut r, n, q.min(n), 0);
        let a = random_map(&mut r, phi.dim());
        let lhs = pullback(&a, &build_canonical(&phi)).unwrap();
        let rhs = build_canonical(&phi.pullback(&a).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn kernel_transforms_by_inverse(seed in any::<u64>(), p in 2usize..4, z in 1usize..3) {
        let mut r = rng(seed);
        let t = build_canonical(&random_form(&mut r, p, 0, z));
        let a = random_map(&mut r, t.dim());
        let k = kernel(&t, RANK_TOL);
        prop_assert_eq!(k.ncols(), z);
        let moved = orthonormal_columns(&(a.inverse().unwrap().matrix() * &k), 1e-12);
        let k2 = kernel(&pullback(&a, &t).unwrap(), RANK_TOL);
        prop_assert_eq!(k2.ncols(), z);
        prop_assert!(max_principal_angle(&moved, &k2) <= 1e-8);
    }

    #[test]
    fn block_permutation_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = random_model(&mut r);
        let w = sample_wreath_element(&model, &mut r).unwrap();
        let a = wreath_to_matrix(&w, &model).unwrap();
        let sigma = extract_permutation(&a, &model, 1e-8).unwrap();
        prop_assert_eq!(&sigma, w.sigma());
        let back = WreathElement::from_matrix(&a, &model, 1e-8).unwrap();
        let a2 = wreath_to_matrix(&back, &model).unwrap();
        prop_assert!(max_diff(a.matrix(), a2.matrix()) <= 1e-9 * a.matrix().abs().max());
    }

    #[test]
    fn wreath_map_is_a_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = random_model(&mut r);
        let g = sample_wreath_element(&model, &mut r).unwrap();
        let h = sample_wreath_element(&model, &mut r).unwrap();
        let hg = wreath_to_matrix(&wreath_compose(&h, &g).unwrap(), &model).unwrap();
        let prod = wreath_to_matrix(&h, &model).unwrap().compose(&wreath_to_matrix(&g, &model).unwrap()).unwrap();
        prop_assert!(max_diff(hg.matrix(), prod.matrix()) <= 1e-9 * prod.matrix().abs().max());
        let id = WreathElement::identity(&model);
        let gi = wreath_compose(&g, &id).unwrap();
        prop_assert_eq!(gi.sigma(), g.sigma());
    }

    #[test]
    fn sampled_members_respect_classes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = random_model(&mut r);
        let a = sample_structure_group_element(&model, &mut r).unwrap();
        let t = model.tensor();
        let pulled = pullback(&a, &t).unwrap();
        prop_assert!(pulled.max_abs_diff(&t) <= 1e-8 * t.max_abs());
        prop_assert!(cross_class_leakage(&a, &model).unwrap() <= 1e-8);
        let classes = allowed_block_permutations(&model).unwrap();
        let sigma = extract_permutation(&a, &model, 1e-8).unwrap();
        prop_assert!(classes.is_admissible(&sigma));
    }

    #[test]
    fn symmetric_functions_ignore_order(values in prop::collection::vec(-10.0f64..10.0, 1..6), seed in any::<u64>()) {
        let mut shuffled = values.clone();
        let mut r = rng(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, r.random_range(0..=i));
        }
        let a = symmetric_combine(&values);
        let b = symmetric_combine(&shuffled);
        for (x, y) in a.elementary.iter().zip(&b.elementary).chain(a.power_sums.iter().zip(&b.power_sums)) {
            assert_relative_eq!(*x, *y, max_relative = 1e-12, epsilon = 1e-9);
        }
        assert_relative_eq!(a.elementary[0], values.iter().sum::<f64>(), max_relative = 1e-12, epsilon = 1e-12);
    }

    #[test]
    fn ricci_invariants_are_basis_independent(seed in any::<u64>(), p in 1usize..4, q in 0usize..3) {
        prop_assume!(p + q >= 2);
        let mut r = rng(seed);
        let phi = random_form(&mut r, p, q, 0);
        let t = build_canonical(&phi);
        let a = random_map(&mut r, phi.dim());
        let t2 = pullback(&a, &t).unwrap();
        let phi2 = phi.pullback(&a).unwrap();
        let s1 = scalar_curvature(&t, &phi).unwrap();
        let s2 = scalar_curvature(&t2, &phi2).unwrap();
        let n = (p + q) as f64;
        assert_relative_eq!(s1, n * (n - 1.0), max_relative = 1e-9);
        assert_relative_eq!(s1, s2, max_relative = 1e-8);
        let e1 = ricci_operator_eigenvalues(&t, &phi).unwrap();
        let e2 = ricci_operator_eigenvalues(&t2, &phi2).unwrap();
        for (x, y) in e1.iter().zip(&e2) {
            assert_relative_eq!(*x, *y, max_relative = 1e-7, epsilon = 1e-8);
        }
    }

    #[test]
    fn block_curvatures_are_stable_under_the_group(seed in any::<u64>()) {
        let mut r = rng(seed);
        let kappas: Vec<f64> = (0..3).map(|_| r.random_range(0.5..4.0)).collect();
        let blocks = kappas.iter().map(|&c| Block::new(SymForm::identity(2), c).unwrap()).collect();
        let model = BlockModelSpace::new(blocks).unwrap();
        let frame = DMatrix::identity(6, 6);
        let mut before = block_sectional_curvatures(&model, &frame).unwrap();
        let a = sample_structure_group_element(&model, &mut r).unwrap();
        let mut after = block_sectional_curvatures(&model, &(a.matrix() * &frame)).unwrap();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        for (x, y) in before.iter().zip(&after) {
            assert_relative_eq!(*x, *y, max_relative = 1e-8);
        }
    }

    #[test]
    fn quadratic_functions_have_parallel_curvature(signs in prop::collection::vec(any::<bool>(), 3..6), x in prop::collection::vec(-2.0f64..2.0, 5)) {
        let coefs: Vec<f64> = signs.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
        let m = MfManifold::new(PolyFunction::half_diagonal_quadratic(&coefs).unwrap()).unwrap();
        let d = mf_nabla_r(&m, &x[..coefs.len()]).unwrap();
        prop_assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn nabla_r_matches_finite_differences(seed in any::<u64>(), p in 3usize..5) {
        let mut r = rng(seed);
        let mut terms: Vec<(Vec<u32>, f64)> = (0..p)
            .map(|i| {
                let mut e = vec![0; p];
                e[i] = 2;
                (e, 0.5)
            })
            .collect();
        for _ in 0..4 {
            let mut e = vec![0u32; p];
            for _ in 0..3 {
                e[r.random_range(0..p)] += 1;
            }
            terms.push((e, r.random_range(-0.3..0.3)));
        }
        let m = MfManifold::new(PolyFunction::new(p, terms).unwrap()).unwrap();
        let x: Vec<f64> = (0..p).map(|_| r.random_range(-0.2..0.2)).collect();
        let exact = mf_nabla_r(&m, &x).unwrap();
        let fd = oracle::nabla_r_fd(&m, &x, 1e-4).unwrap();
        let scale = exact.max_abs().max(1e-3);
        for (e, f) in exact.components().iter().zip(&fd) {
            prop_assert!((e - f).abs() <= 1e-6 * scale.max(1.0), "{} vs {}", e, f);
        }
    }

    #[test]
    fn json_round_trips_are_byte_identical(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = random_model(&mut r);
        let s = serde_json::to_string(&model).unwrap();
        let back: BlockModelSpace = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(&serde_json::to_string(&back).unwrap(), &s);

        let t = model.tensor();
        let s = serde_json::to_string(&t).unwrap();
        let back: CurvTensor = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(&serde_json::to_string(&back).unwrap(), &s);

        let w = sample_wreath_element(&model, &mut r).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        let back: WreathElement = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(&serde_json::to_string(&back).unwrap(), &s);

        let a = random_map(&mut r, 3);
        let s = serde_json::to_string(&a).unwrap();
        let back: LinearMap = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(&serde_json::to_string(&back).unwrap(), &s);

        let f = PolyFunction::new(3, [(vec![1, 2, 0], r.random_range(-1.0..1.0)), (vec![0, 0, 3], 0.25)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let back: PolyFunction = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(&serde_json::to_string(&back).unwrap(), &s);
    }
}
