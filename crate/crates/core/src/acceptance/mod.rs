//! The acceptance suite: ten end-to-end criteria, each checked against an
//! independent oracle. The integration test runs it at full sample counts;
//! `curvlab selftest` runs it at reduced counts.

pub mod oracle;

use std::fmt;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::{LinearMap, SymForm, RANK_TOL};
use crate::invariants::{
    block_sectional_curvatures, check_invariance, check_invariance_with, ricci, scalar_curvature, symmetric_combine,
};
use crate::linalg::{
    max_abs, max_abs_matrix, max_principal_angle, random_normal_matrix, random_orthogonal,
    random_symmetric_with_signature,
};
use crate::mf::{
    hessian, mf_alpha, mf_nabla_r, mf_scalar_curvature, skew_tsankov_check, skew_tsankov_decompose, skew_tsankov_model,
    MfManifold, PolyFunction,
};
use crate::model::{Block, BlockModelSpace};
use crate::par::{item_rng, map_indexed, Exec};
use crate::structure::sampling::{random_eta_isometry, sample_unimodular_2};
use crate::structure::{
    allowed_block_permutations, block_swap, classify_canonical_member, extract_permutation, is_member, sample_isometry,
    sample_para_isometry, sample_structure_group_element, sample_wreath_element, wreath_to_matrix, BlockPermutation,
};
use crate::tensor::{build_canonical, kernel, pullback, CurvTensor};

/// Knobs for a suite run. Criterion-specific numeric thresholds are fixed;
/// only the membership and kernel tolerances can be overridden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceConfig {
    pub seed: u64,
    /// Multiplier on every sample count (1.0 = full suite).
    pub sample_scale: f64,
    pub membership_tol: f64,
    pub kernel_tol: f64,
    pub exec: Exec,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            sample_scale: 1.0,
            membership_tol: 1e-8,
            kernel_tol: RANK_TOL,
            exec: Exec::default(),
        }
    }
}

impl AcceptanceConfig {
    /// Reduced counts for a quick self-test.
    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            sample_scale: 0.2,
            ..Self::default()
        }
    }

    fn count(&self, full: usize) -> usize {
        ((full as f64 * self.sample_scale).ceil() as usize).max(1)
    }

    fn rng(&self, criterion: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(1000 + criterion);
        r
    }

    fn stream_seed(&self, criterion: u64) -> u64 {
        self.seed ^ criterion.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {:<34} {} ({:.2}s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

type Check = fn(&AcceptanceConfig) -> Result<(bool, String)>;

pub const CRITERIA: [(&str, Check); 10] = [
    ("curvature identities", criterion_identities),
    ("kernel law", criterion_kernel),
    ("canonical membership totality", criterion_totality),
    ("permutation round trip", criterion_round_trip),
    ("dimension/signature obstructions", criterion_obstructions),
    ("class direct-product split", criterion_split),
    ("ricci/scalar oracle", criterion_ricci_scalar),
    ("symmetric block invariants", criterion_symmetric_invariants),
    ("M_f suite", criterion_mf),
    ("skew-Tsankov decomposition", criterion_skew_tsankov),
];

/// Runs criterion `id` (1-based). Errors inside a criterion count as failure.
pub fn run_criterion(id: usize, cfg: &AcceptanceConfig) -> CriterionOutcome {
    let (name, check) = CRITERIA[id - 1];
    let start = Instant::now();
    let (pass, detail) = match check(cfg) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionOutcome {
        id,
        name,
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionOutcome> {
    (1..=CRITERIA.len()).map(|id| run_criterion(id, cfg)).collect()
}

fn random_signature<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> (usize, usize) {
    let p = rng.random_range(0..=rank);
    (p, rank - p)
}

fn random_form<R: Rng + ?Sized>(rng: &mut R, plus: usize, minus: usize, zero: usize) -> Result<SymForm> {
    SymForm::new(random_symmetric_with_signature(rng, plus, minus, zero))
}

/// Criterion 1: 200 random forms, dims 2–8, mixed signatures. Every
/// canonical tensor satisfies the curvature identities to 1e-12 relative,
/// and its components match the closed form.
fn criterion_identities(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let n_forms = cfg.count(200);
    let seed = cfg.stream_seed(1);
    let results = map_indexed(cfg.exec, n_forms, |s| -> Result<(f64, f64, f64)> {
        let mut rng = item_rng(seed, s);
        let n = rng.random_range(2..=8);
        let zero = if rng.random_bool(0.2) {
            rng.random_range(1..n)
        } else {
            0
        };
        let (p, q) = random_signature(&mut rng, n - zero);
        let f = random_form(&mut rng, p, q, zero)?;
        let t = build_canonical(&f);
        let lib = t.validate(1e-12).relative_residual();
        let ora = oracle::identity_residual(n, t.components());
        let mut formula = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let d = t.get(i, j, k, l) - oracle::canonical_component(f.matrix(), i, j, k, l);
                        formula = formula.max(d.abs());
                    }
                }
            }
        }
        Ok((lib, ora, formula))
    });
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for r in results {
        let (a, b, c) = r?;
        worst = (worst.0.max(a), worst.1.max(b), worst.2.max(c));
    }
    let pass = worst.0 <= 1e-12 && worst.1 <= 1e-12 && worst.2 == 0.0;
    Ok((
        pass,
        format!(
            "{n_forms} forms; residual lib {:.1e}, oracle {:.1e}; closed-form diff {:.1e}",
            worst.0, worst.1, worst.2
        ),
    ))
}

/// Criterion 2: 50 degenerate forms of rank ≥ 2; `ker R_φ` equals the null
/// space of `φ` to principal angle 1e-8.
fn criterion_kernel(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let n_forms = cfg.count(50);
    let mut rng = cfg.rng(2);
    let mut worst = 0.0_f64;
    let mut dim_mismatch = 0;
    for _ in 0..n_forms {
        let n = rng.random_range(3..=8);
        let rank = rng.random_range(2..n);
        let (p, q) = random_signature(&mut rng, rank);
        let f = random_form(&mut rng, p, q, n - rank)?;
        let kr = kernel(&build_canonical(&f), cfg.kernel_tol);
        let kf = oracle::null_space(f.matrix(), 1e-10);
        if kr.ncols() != n - rank || kf.ncols() != n - rank {
            dim_mismatch += 1;
        }
        worst = worst.max(max_principal_angle(&kr, &kf));
    }
    let pass = dim_mismatch == 0 && worst < 1e-8;
    Ok((
        pass,
        format!("{n_forms} forms; max principal angle {worst:.1e}; dimension mismatches {dim_mismatch}"),
    ))
}

/// A random element fixing a possibly degenerate `φ = Q diag(λ, 0) Qᵀ`:
/// an isometry of the range block, arbitrary invertible kernel block, and an
/// arbitrary range-to-kernel coupling.
fn member_of_degenerate<R: Rng + ?Sized>(rng: &mut R, lambdas: &[f64], zero: usize) -> (SymForm, LinearMap) {
    let r = lambdas.len();
    let n = r + zero;
    let q = random_orthogonal(rng, n);
    let mut d = DMatrix::zeros(n, n);
    for (i, &l) in lambdas.iter().enumerate() {
        d[(i, i)] = l;
    }
    let phi = &q * d * q.transpose();
    let phi = SymForm::from_symmetric_part(&phi).expect("finite");
    let signs: Vec<f64> = lambdas.iter().map(|l| l.signum()).collect();
    let s = random_eta_isometry(rng, &signs);
    let scale = DMatrix::from_fn(r, r, |i, j| if i == j { lambdas[i].abs().sqrt() } else { 0.0 });
    let scale_inv = DMatrix::from_fn(r, r, |i, j| if i == j { 1.0 / lambdas[i].abs().sqrt() } else { 0.0 });
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (r, r)).copy_from(&(&scale_inv * s * scale));
    let c = random_normal_matrix(rng, zero, r, 1.0);
    let dk = random_normal_matrix(rng, zero, zero, 0.3) + DMatrix::identity(zero, zero) * 2.0;
    m.view_mut((r, 0), (zero, r)).copy_from(&c);
    m.view_mut((r, r), (zero, zero)).copy_from(&dk);
    let a = LinearMap::new(&q * m * q.transpose()).expect("finite");
    (phi, a)
}

/// Criterion 3: on rank ≥ 3 forms, the classification agrees with direct
/// membership in every trial; in dimension 2, `|det| = 1` maps are members
/// and `|det| ∈ [1.1, 3]` maps are not.
fn criterion_totality(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let trials = cfg.count(500);
    let tol = cfg.membership_tol;
    let seed = cfg.stream_seed(3);
    let results = map_indexed(cfg.exec, trials, |s| -> Result<(bool, bool)> {
        let mut rng = item_rng(seed, s);
        let kind = rng.random_range(0..6);
        let (phi, a) = if rng.random_bool(0.25) {
            let n = rng.random_range(4..=6);
            let rank = rng.random_range(3..n);
            let lambdas: Vec<f64> = (0..rank)
                .map(|_| rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            let (phi, member) = member_of_degenerate(&mut rng, &lambdas, n - rank);
            (phi, perturb(&mut rng, member, kind)?)
        } else {
            let n = rng.random_range(3..=6);
            let (p, q) = if rng.random_bool(0.4) && n % 2 == 0 {
                (n / 2, n / 2)
            } else {
                random_signature(&mut rng, n)
            };
            let phi = random_form(&mut rng, p, q, 0)?;
            let mut member = sample_isometry(&phi, &mut rng)?;
            if p == q && rng.random_bool(0.5) {
                member = member.compose(&sample_para_isometry(&phi)?)?;
            }
            (phi.clone(), perturb(&mut rng, member, kind)?)
        };
        let direct = is_member(&a, &build_canonical(&phi), tol)?.member;
        let verdict = classify_canonical_member(&a, &phi, tol)?;
        Ok((direct, verdict.is_member()))
    });
    let mut agree = 0;
    let mut members = 0;
    for r in results {
        let (direct, classified) = r?;
        agree += usize::from(direct == classified);
        members += usize::from(direct);
    }

    let n2 = cfg.count(100);
    let mut rng = cfg.rng(3);
    let mut unit_ok = 0;
    let mut big_ok = 0;
    for _ in 0..n2 {
        let (p, q) = random_signature(&mut rng, 2);
        let phi = random_form(&mut rng, p, q, 0)?;
        let t = build_canonical(&phi);
        let a = LinearMap::new(sample_unimodular_2(&mut rng))?;
        let v = classify_canonical_member(&a, &phi, tol)?;
        unit_ok += usize::from(is_member(&a, &t, tol)?.member && v.is_member());

        let d = rng.random_range(1.1..3.0);
        let b =
            LinearMap::new(sample_unimodular_2(&mut rng) * DMatrix::from_diagonal(&DVector::from_vec(vec![d, 1.0])))?;
        let v = classify_canonical_member(&b, &phi, tol)?;
        big_ok += usize::from(!is_member(&b, &t, tol)?.member && !v.is_member());
    }
    let pass = agree == trials && members > 0 && members < trials && unit_ok == n2 && big_ok == n2;
    Ok((
        pass,
        format!(
            "agreement {agree}/{trials} ({members} members); dim 2: det±1 members {unit_ok}/{n2}, |det|>1 non-members {big_ok}/{n2}"
        ),
    ))
}

/// Kind 0–2 keeps the member; 3 replaces it by a Gaussian matrix; 4 perturbs
/// it by 1e-3; 5 rescales it by 1.1.
fn perturb<R: Rng + ?Sized>(rng: &mut R, a: LinearMap, kind: u32) -> Result<LinearMap> {
    let n = a.dim();
    match kind {
        3 => LinearMap::new(random_normal_matrix(rng, n, n, 1.0) + DMatrix::identity(n, n) * 0.1),
        4 => LinearMap::new(a.matrix() * (DMatrix::identity(n, n) + random_normal_matrix(rng, n, n, 1e-3))),
        5 => LinearMap::new(a.matrix() * 1.1),
        _ => Ok(a),
    }
}

/// Random model with up to five blocks of dimension 2–4 drawn from at most
/// three classes, with random sign flips and curvature scales.
fn random_model<R: Rng + ?Sized>(rng: &mut R) -> Result<BlockModelSpace> {
    let k = rng.random_range(1..=5);
    let n_classes = rng.random_range(1..=3.min(k));
    let classes: Vec<(usize, usize)> = (0..n_classes)
        .map(|_| {
            let d = rng.random_range(2..=4);
            (d, rng.random_range(0..=d))
        })
        .collect();
    let mut blocks = Vec::with_capacity(k);
    for b in 0..k {
        let (d, p) = if b < n_classes {
            classes[b]
        } else {
            classes[rng.random_range(0..n_classes)]
        };
        let (p, q) = if rng.random_bool(0.5) { (p, d - p) } else { (d - p, p) };
        let scale = rng.random_range(0.5..3.0);
        blocks.push(Block::new(random_form(rng, p, q, 0)?, scale)?);
    }
    blocks.shuffle(rng);
    BlockModelSpace::new(blocks)
}

/// Criterion 4: planted wreath elements over random models; the extracted
/// permutation equals the planted one, and the three-block worked pattern
/// yields `(1 2 3)`.
fn criterion_round_trip(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let trials = cfg.count(500);
    let tol = cfg.membership_tol;
    let seed = cfg.stream_seed(4);
    let results = map_indexed(cfg.exec, trials, |s| -> Result<(bool, bool)> {
        let mut rng = item_rng(seed, s);
        let model = random_model(&mut rng)?;
        let w = sample_wreath_element(&model, &mut rng)?;
        let a = wreath_to_matrix(&w, &model)?;
        let sigma = extract_permutation(&a, &model, tol)?;
        Ok((&sigma == w.sigma(), !w.sigma().is_identity()))
    });
    let mut recovered = 0;
    let mut nontrivial = 0;
    for r in results {
        let (ok, nt) = r?;
        recovered += usize::from(ok);
        nontrivial += usize::from(nt);
    }

    #[rustfmt::skip]
    let pattern = DMatrix::from_row_slice(6, 6, &[
        0.0, 0.0, 0.0, 0.0, 2.0, 1.0,
        0.0, 0.0, 0.0, 0.0, 3.0, 2.0,
        0.0, -0.5, 0.0, 0.0, 0.0, 0.0,
        2.0, 0.7, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 2.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 3.0, 0.0, 0.0,
    ]);
    let model = BlockModelSpace::from_forms(vec![SymForm::identity(2); 3])?;
    let cycle = extract_permutation(&LinearMap::new(pattern)?, &model, tol)?.to_string();
    let pass = recovered == trials && cycle == "(1 2 3)";
    Ok((
        pass,
        format!("recovered {recovered}/{trials} ({nontrivial} non-identity); worked pattern σ = {cycle}"),
    ))
}

/// Criterion 5: blocks (2,(2,0)), (2,(1,1)), (3,(3,0)) admit only the
/// identity permutation and members never couple blocks; blocks (2,(2,0))
/// and (2,(0,2)) are exchanged by some sampled member.
fn criterion_obstructions(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let samples = cfg.count(200);
    let tol = cfg.membership_tol;
    let mut rng = cfg.rng(5);
    let model = BlockModelSpace::from_forms(vec![
        random_form(&mut rng, 2, 0, 0)?,
        random_form(&mut rng, 1, 1, 0)?,
        random_form(&mut rng, 3, 0, 0)?,
    ])?;
    let t = model.tensor();
    let labels: Vec<usize> = (0..3).collect();
    let mut identity = 0;
    let mut worst_leak = 0.0_f64;
    for _ in 0..samples {
        let a = sample_structure_group_element(&model, &mut rng)?;
        if !is_member(&a, &t, tol)?.member {
            return Ok((false, "sampled element failed membership".into()));
        }
        identity += usize::from(extract_permutation(&a, &model, tol)?.is_identity());
        worst_leak = worst_leak.max(oracle::cross_label_leakage(a.matrix(), &model, &labels));
    }

    let swap_model =
        BlockModelSpace::from_forms(vec![random_form(&mut rng, 2, 0, 0)?, random_form(&mut rng, 0, 2, 0)?])?;
    let swap = BlockPermutation::transposition(2, 0, 1);
    let mut swaps = 0;
    for _ in 0..samples {
        let a = sample_structure_group_element(&swap_model, &mut rng)?;
        swaps += usize::from(extract_permutation(&a, &swap_model, tol)? == swap);
    }
    let pass = identity == samples && worst_leak <= 1e-9 && swaps >= 1;
    Ok((
        pass,
        format!(
            "identity σ {identity}/{samples}; max cross-block entry {worst_leak:.1e}; sign-reversed pair swapped {swaps}/{samples}"
        ),
    ))
}

/// Criterion 6: for two-class models every sampled member is block diagonal
/// across the class split.
fn criterion_split(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let samples = cfg.count(200);
    let tol = cfg.membership_tol;
    let mut rng = cfg.rng(6);
    let models = vec![
        BlockModelSpace::from_forms(vec![
            random_form(&mut rng, 2, 1, 0)?,
            random_form(&mut rng, 2, 0, 0)?,
            random_form(&mut rng, 1, 2, 0)?,
            random_form(&mut rng, 0, 2, 0)?,
        ])?,
        BlockModelSpace::new(vec![
            Block::new(random_form(&mut rng, 2, 2, 0)?, 2.0)?,
            Block::new(random_form(&mut rng, 2, 2, 0)?, 0.5)?,
            Block::new(random_form(&mut rng, 3, 0, 0)?, 1.0)?,
        ])?,
    ];
    let mut worst = 0.0_f64;
    let mut members = 0;
    let mut total = 0;
    let mut nontrivial = 0;
    for model in &models {
        let classes = allowed_block_permutations(model)?;
        if classes.classes().len() != 2 {
            return Err(Error::InvalidModel("expected a two-class model".into()));
        }
        let labels: Vec<usize> = (0..model.num_blocks()).map(|p| classes.class_of(p)).collect();
        let t = model.tensor();
        for _ in 0..samples {
            let a = sample_structure_group_element(model, &mut rng)?;
            members += usize::from(is_member(&a, &t, tol)?.member);
            nontrivial += usize::from(!extract_permutation(&a, model, tol)?.is_identity());
            worst = worst.max(oracle::cross_label_leakage(a.matrix(), model, &labels));
            total += 1;
        }
    }
    let pass = members == total && worst <= 1e-9;
    Ok((
        pass,
        format!("{members}/{total} members ({nontrivial} permuting blocks); max cross-class entry {worst:.1e}"),
    ))
}

/// Criterion 7: for `R_φ` on dims 3–8, `ρ = (N−1)φ` and `τ = N(N−1)` within
/// 1e-9, and the library contraction agrees with the inverse-metric oracle.
fn criterion_ricci_scalar(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let per_dim = cfg.count(10);
    let mut rng = cfg.rng(7);
    let (mut rho_err, mut tau_err, mut oracle_err) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut count = 0;
    for n in 3..=8 {
        for _ in 0..per_dim {
            let (p, q) = random_signature(&mut rng, n);
            let f = random_form(&mut rng, p, q, 0)?;
            let t = build_canonical(&f);
            let rho = ricci(&t, &f)?;
            let tau = scalar_curvature(&t, &f)?;
            let expected = (n - 1) as f64;
            rho_err = rho_err.max(max_abs_matrix(&(rho.matrix() - f.matrix() * expected)));
            tau_err = tau_err.max((tau - (n * (n - 1)) as f64).abs());
            let o_rho = oracle::ricci_of_canonical(f.matrix());
            let o_tau = oracle::scalar_of_canonical(f.matrix());
            oracle_err = oracle_err
                .max(max_abs_matrix(&(rho.matrix() - o_rho)))
                .max((tau - o_tau).abs());
            count += 1;
        }
    }
    let pass = rho_err <= 1e-9 && tau_err <= 1e-9 && oracle_err <= 1e-9;
    Ok((
        pass,
        format!("{count} forms; max|ρ−(N−1)φ| {rho_err:.1e}; max|τ−N(N−1)| {tau_err:.1e}; vs oracle {oracle_err:.1e}"),
    ))
}

/// Criterion 8: on two swappable 2-dim blocks with κ = (2, 5), the
/// elementary symmetric functions (7, 10) are invariant within 1e-8 under
/// sampled members (including swaps), and κ_1 − κ_2 changes sign under the
/// swap.
fn criterion_symmetric_invariants(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let samples = cfg.count(100);
    let tol = cfg.membership_tol;
    let mut rng = cfg.rng(8);
    let model = BlockModelSpace::new(vec![
        Block::new(random_form(&mut rng, 2, 0, 0)?, 2.0)?,
        Block::new(random_form(&mut rng, 2, 0, 0)?, 5.0)?,
    ])?;
    let frame = DMatrix::identity(4, 4);
    let elementary = |f: &DMatrix<f64>| Ok(symmetric_combine(&block_sectional_curvatures(&model, f)?).elementary);
    let reference = elementary(&frame)?;
    let ref_ok = (reference[0] - 7.0).abs() <= 1e-8 && (reference[1] - 10.0).abs() <= 1e-8;

    let seed = cfg.stream_seed(8);
    let report = check_invariance(elementary, &model, &frame, samples, 1e-8, seed, cfg.exec)?;
    let mut swaps = 0;
    for s in 0..samples {
        let a = sample_structure_group_element(&model, &mut item_rng(seed, s))?;
        swaps += usize::from(!extract_permutation(&a, &model, tol)?.is_identity());
    }

    let swap = wreath_to_matrix(&block_swap(&model, 0, 1)?, &model)?;
    let with_swap = check_invariance_with(elementary, &frame, std::slice::from_ref(&swap), 1e-8, cfg.exec)?;
    let diff = |f: &DMatrix<f64>| {
        let k = block_sectional_curvatures(&model, f)?;
        Ok(vec![k[0] - k[1]])
    };
    let before = diff(&frame)?[0];
    let after = diff(&(swap.matrix() * &frame))?[0];
    let control = check_invariance_with(diff, &frame, &[swap], 1e-8, cfg.exec)?;
    let flipped = before < 0.0 && after > 0.0 && (before + after).abs() <= 1e-8 && !control.pass;

    let pass = ref_ok && report.pass && with_swap.pass && swaps > 0 && flipped;
    Ok((
        pass,
        format!(
            "(e1, e2) = ({:.6}, {:.6}); max deviation {:.1e} over {samples} samples ({swaps} swaps); κ1−κ2: {before:.3} → {after:.3}",
            reference[0], reference[1], report.max_deviation.max(with_swap.max_deviation)
        ),
    ))
}

fn half_quadratic_plus_cube() -> Result<MfManifold> {
    let quad = PolyFunction::half_diagonal_quadratic(&[1.0, 1.0, 1.0])?;
    let cube = PolyFunction::new(3, [(vec![3, 0, 0], 1.0)])?;
    MfManifold::new(quad.add(&cube)?)
}

fn random_poly<R: Rng + ?Sized>(rng: &mut R, p: usize, max_degree: u32) -> Result<PolyFunction> {
    // a nondegenerate quadratic part keeps α_f well defined near the origin
    let mut terms: Vec<(Vec<u32>, f64)> = (0..p)
        .map(|i| {
            let mut e = vec![0; p];
            e[i] = 2;
            (e, if rng.random_bool(0.5) { 0.5 } else { -0.5 })
        })
        .collect();
    for _ in 0..3 * p {
        let mut e = vec![0; p];
        let deg = rng.random_range(3..=max_degree);
        for _ in 0..deg {
            e[rng.random_range(0..p)] += 1;
        }
        terms.push((e, rng.random_range(-1.0..1.0)));
    }
    PolyFunction::new(p, terms)
}

/// Criterion 9: `M_f` checks. Quadratic `f` has `∇R = 0` and `α_f = 0`;
/// `½Σx_i² + x_1³` has different `α_f` at the origin and at `(1,0,0)`;
/// `∇R` matches central differences; the ambient scalar curvature vanishes.
fn criterion_mf(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let mut rng = cfg.rng(9);
    let mut tau_max = 0.0_f64;

    let quad = MfManifold::new(PolyFunction::half_diagonal_quadratic(&[-1.0, 1.0, 1.0])?)?;
    let n_points = cfg.count(10);
    let (mut nabla_max, mut alpha_max) = (0.0_f64, 0.0_f64);
    for _ in 0..n_points {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        nabla_max = nabla_max.max(mf_nabla_r(&quad, &x)?.max_abs());
        alpha_max = alpha_max.max(mf_alpha(&quad, &x)?);
        tau_max = tau_max.max(mf_scalar_curvature(&quad, &x)?.abs());
    }
    let quad_ok = nabla_max <= 1e-10 && alpha_max == 0.0;

    let cubic = half_quadratic_plus_cube()?;
    let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
    let mut alphas = [0.0; 2];
    let mut oracle_gap = 0.0_f64;
    for (slot, x) in pts.iter().enumerate() {
        alphas[slot] = mf_alpha(&cubic, x)?;
        let h = hessian(cubic.function(), x)?;
        let fd = oracle::nabla_r_fd(&cubic, x, 1e-4)?;
        let by_fd = oracle::alpha_by_inverse(h.matrix(), &fd);
        oracle_gap = oracle_gap.max((by_fd - alphas[slot]).abs() / alphas[slot].max(1.0));
        tau_max = tau_max.max(mf_scalar_curvature(&cubic, x)?.abs());
    }
    let cubic_ok = (alphas[0] - alphas[1]).abs() > 1e-3 && oracle_gap <= 1e-6;

    let mut fd_err = 0.0_f64;
    let n_polys = cfg.count(8);
    for s in 0..n_polys {
        let p = 3 + s % 2;
        let m = MfManifold::new(random_poly(&mut rng, p, 3 + (s as u32 / 2) % 2)?)?;
        let x: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact = mf_nabla_r(&m, &x)?;
        let fd = oracle::nabla_r_fd(&m, &x, 1e-4)?;
        let diff = exact
            .components()
            .iter()
            .zip(&fd)
            .fold(0.0_f64, |a, (e, f)| a.max((e - f).abs()));
        fd_err = fd_err.max(diff / exact.max_abs().max(f64::MIN_POSITIVE));
        tau_max = tau_max.max(mf_scalar_curvature(&m, &x)?.abs());
    }

    let pass = quad_ok && cubic_ok && fd_err <= 1e-6 && tau_max <= 1e-9;
    Ok((
        pass,
        format!(
            "quadratic max|∇R| {nabla_max:.1e}, max α {alpha_max:.1e}; cubic α {:.4} vs {:.4} (oracle gap {oracle_gap:.1e}); FD rel err {fd_err:.1e}; max|τ| {tau_max:.1e}",
            alphas[0], alphas[1]
        ),
    ))
}

/// Criterion 10: κ = (2, 5) planes plus a 1-dim kernel pass the
/// commutation check; after random orthogonal conjugation the decomposition
/// recovers the kernel dimension and κ multiset within 1e-8; `R_φ` on `I_4`
/// fails the check.
fn criterion_skew_tsankov(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let mut rng = cfg.rng(10);
    let planted = skew_tsankov_model(&[2.0, 5.0], 1)?;
    let id5 = SymForm::identity(5);
    let commutes = skew_tsankov_check(&id5, &planted, 1e-10)?;
    let trials = cfg.count(20);
    let mut recovered = 0;
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let q = LinearMap::new(random_orthogonal(&mut rng, 5))?;
        let t: CurvTensor = pullback(&q, &planted)?;
        let d = skew_tsankov_decompose(&id5, &t, 1e-8, &mut rng)?;
        let mut k = d.kappas.clone();
        k.sort_by(f64::total_cmp);
        let err = if k.len() == 2 {
            max_abs(&[k[0] - 2.0, k[1] - 5.0])
        } else {
            f64::INFINITY
        };
        worst = worst.max(err);
        recovered += usize::from(d.kernel.ncols() == 1 && err <= 1e-8);
    }
    let i4 = SymForm::identity(4);
    let rejects = !skew_tsankov_check(&i4, &build_canonical(&i4), 1e-10)?;
    let pass = commutes && recovered == trials && rejects;
    Ok((
        pass,
        format!(
            "planted sum commutes: {commutes}; recovered {recovered}/{trials} (max κ error {worst:.1e}); R_I4 rejected: {rejects}"
        ),
    ))
}
