use thiserror::Error;

/// Errors raised by problem construction, the solvers and the diagnostics.
#[derive(Debug, Error)]
pub enum SdpError {
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("dual iteration diverged at iteration {iter}: g = {g_val:e} (initial {g_initial:e})")]
    Diverged {
        iter: usize,
        g_val: f64,
        g_initial: f64,
    },

    #[error("infeasible radius: delta = {delta:e} is below the least-squares residual {residual:e}")]
    InfeasibleRadius { delta: f64, residual: f64 },

    #[error("no strictly feasible dual anchor: lambda_min(Z(anchor)) = {0:e}")]
    NoFeasibleAnchor(f64),

    #[error("ill-posed bound: {0}")]
    IllPosed(String),

    #[error("problem too large for the dense reference solver: n = {n}, limit {limit}")]
    SizeLimit { n: usize, limit: usize },

    #[error("dense reference solver failed: {0}")]
    OracleFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SdpError>;
