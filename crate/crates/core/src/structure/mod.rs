//! Structure groups of canonical and decomposable curvature models.
//!
//! * [`membership`]: `A*R = R` tests and the classification of `G_{R_φ}`.
//! * [`sampling`]: random elements of `G_φ`, para-isometries, `|det| = 1` maps.
//! * [`permutation`]: block permutations, admissibility classes, and the
//!   extraction of `σ` from a member of `G_{⊕R_{φ_i}}`.
//! * [`wreath`]: wreath-product elements `(g_1, …, g_k; σ)` and their matrices.

pub mod membership;
pub mod permutation;
pub mod sampling;
pub mod wreath;

pub use membership::{classify_canonical_member, is_member, Membership, MembershipVerdict, Verdict};
pub use permutation::{allowed_block_permutations, extract_permutation, BlockClasses, BlockPermutation};
pub use sampling::{random_pseudo_orthonormal_basis, sample_isometry, sample_para_isometry, sample_unimodular_2};
pub use wreath::{
    block_swap, cross_class_leakage, sample_structure_group_element, sample_wreath_element, wreath_compose,
    wreath_to_matrix, WreathElement,
};

/// Default relative tolerance for membership and permutation extraction.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
