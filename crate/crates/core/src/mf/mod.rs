//! The manifolds `M_f` and skew-Tsankov models.

pub mod manifold;
pub mod poly;
pub mod tsankov;

pub use manifold::{
    hessian, mf_alpha, mf_alpha_batch, mf_curvature, mf_metric, mf_nabla_r, mf_scalar_curvature, Deriv5Tensor,
    MfManifold,
};
pub use poly::PolyFunction;
pub use tsankov::{
    curvature_operators, skew_tsankov_check, skew_tsankov_decompose, skew_tsankov_model, skew_tsankov_report,
    CommutationReport, SkewTsankovDecomposition,
};
