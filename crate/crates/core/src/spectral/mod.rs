//! Matrix-free eigensolvers, operator-norm estimates and projections.

mod lanczos;
mod opnorm;
mod projections;

pub use lanczos::{
    min_eigpair, smallest_subspace, Eigenbasis, EigensolverConfig, MinEigpair, CLUSTER_GAP,
};
pub use opnorm::{operator_norm_amap, power_lambda_max};
pub use projections::{project_ball, project_psd};
