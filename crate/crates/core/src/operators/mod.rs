//! Cauchy-Leray and Bochner-Martinelli kernels, their quadrature
//! application, dense Nyström matrices, and the two routes to the Szegő
//! projection (Kerzman-Stein and basis projection).

mod apply;
mod function;
mod holo;
mod kernels;
mod matrix;
mod norms;
mod szego;

pub use apply::{apply_boundary_offsupport, apply_interior, InteriorValue, OffSupportValue};
pub use function::{monomial, BoundaryFunction};
pub use holo::dbar_check;
pub use kernels::{
    bm_kernel, cl_denominator, cl_denominator_from_grad, cl_kernel, KernelKind, DIAGONAL_CUTOFF,
};
pub use matrix::{
    assemble, ks_skew, row_point, DiagonalPolicy, MeasureTag, OperatorMatrix, DEFAULT_NODE_CAP,
};
pub use norms::{
    lp_norm, lp_norm_weighted, opnorm_p, opnorm_p_weighted, spectral_norm, spectral_norm_strict,
    spectral_norm_weighted, weighted_submatrix, CandidateOptions, FnOp, LinOp, NormEstimate,
    OpNormBound, PowerOptions,
};
pub use szego::{
    idempotence_defect, self_adjointness_defect, szego_direct, szego_ks, weighted_norm,
    DirectProjection, HolomorphicBasis, KsProjection, NeumannDiagnostic,
};
