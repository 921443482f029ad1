//! Storage-optimal semidefinite programming.
//!
//! The solver minimizes the exact-penalty dual
//! `g_alpha(y) = -b^T y + alpha * max(-lambda_min(C - A^T y), 0)` with a
//! matrix-free subgradient method, then recovers a low-rank primal
//! `X = V S V^T` from the eigenvectors of the `r` smallest eigenvalues of the
//! dual slack matrix.
//!
//! Data is accessed only through the oracles `u -> Cu`,
//! `(u, v) -> A((uv^T + vu^T)/2)` and `(y, u) -> (A^T y) u`, so working
//! storage stays at `O(m + n r)` plus the Krylov workspace.

pub mod audit;
pub mod diagnostics;
pub mod dual;
pub mod error;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod pipeline;
pub mod problem;
pub mod recovery;
pub mod spectral;

pub use error::{Result, SdpError};
pub use problem::{
    adjoint_consistency_check, build_matrix_completion, build_maxcut, ConstraintMap, CostOracle,
    SdpProblem, SlackOperator, SparseSymmetric, WeightedGraph,
};
