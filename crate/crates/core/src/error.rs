use thiserror::Error;

/// Errors raised by the curvature, structure-group and geometry routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("form is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("tensor violates curvature identities (residual {residual:e} > allowed {allowed:e})")]
    NotCurvature { residual: f64, allowed: f64 },

    #[error("form is not positive definite ({minus} negative, {zero} zero eigenvalues)")]
    NotPositiveDefinite { minus: usize, zero: usize },

    #[error("symmetric form is degenerate ({nullity} zero eigenvalues)")]
    DegenerateForm { nullity: usize },

    #[error("linear map is singular (|det| = {det:e})")]
    SingularMap { det: f64 },

    #[error("subspaces do not form a direct-sum decomposition")]
    InvalidSplit,

    #[error("form signature is not balanced ({plus} positive, {minus} negative)")]
    NotBalanced { plus: usize, minus: usize },

    #[error("map is not a member of the structure group (residual {residual:e})")]
    NotAMember { residual: f64 },

    #[error("inconsistent block permutation: {0}")]
    InconsistentPermutation(String),

    #[error("wreath elements are defined over different models")]
    ModelMismatch,

    #[error("block dimensions incompatible with the block permutation")]
    IncompatibleBlocks,

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("plane is degenerate (denominator {denominator:e})")]
    DegeneratePlane { denominator: f64 },

    #[error("Hessian has rank {rank} < {expected} at the evaluation point")]
    DegenerateHessian { rank: usize, expected: usize },

    #[error("curvature operators do not commute (max commutator {residual:e})")]
    NotSkewTsankov { residual: f64 },

    #[error("could not separate invariant 2-planes: {0}")]
    DegenerateSpectrum(String),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("M_f requires p >= 3, got {0}")]
    TooFewVariables(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
