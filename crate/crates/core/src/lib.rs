//! Canonical algebraic curvature tensors `R_φ`, structure groups of
//! decomposable model spaces, and curvature invariants including the
//! non-Weyl invariant `α_f` of the manifolds `M_f`.
//!
//! Index conventions are 0-based in the API and 1-based in printed block
//! permutations and JSON permutation images.

pub mod acceptance;
pub mod error;
pub mod form;
pub mod invariants;
pub mod io;
pub mod linalg;
pub mod mf;
pub mod model;
mod multilinear;
pub mod par;
pub mod structure;
pub mod tensor;

pub use error::{Error, Result};
pub use form::{pseudo_orthonormalize, signature, LinearMap, PseudoONBasis, Signature, SymForm, RANK_TOL};
pub use model::{Block, BlockModelSpace};
pub use par::Exec;
pub use structure::{
    allowed_block_permutations, classify_canonical_member, extract_permutation, is_member, BlockClasses,
    BlockPermutation, MembershipVerdict, Verdict, WreathElement, MEMBERSHIP_TOL,
};
pub use tensor::{build_canonical, direct_sum, kernel, pullback, CurvTensor, ValidationReport};
