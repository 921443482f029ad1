//! Primal recovery from the small-eigenvalue eigenspace of the dual slack.
//!
//! With `V` spanning the `r` smallest eigenvectors of `Z(y)`, the compressed
//! problems are
//!
//! * MinFeas: minimize `||A_V(S) - b||` over `S` PSD, solved by accelerated
//!   projected gradient with fixed-interval restarts;
//! * MinObj: minimize `tr(C_V S)` subject to `||A_V(S) - b|| <= delta`,
//!   `S` PSD, solved by the Chambolle-Pock primal-dual iteration.
//!
//! `A_V(S) = A(V S V^T)` is evaluated from the eigendecomposition of `S` as a
//! sum of symmetrized rank-one terms, so `V S V^T` is never formed.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, SdpError};
use crate::linalg;
use crate::problem::SdpProblem;
use crate::spectral::{project_ball, project_psd, smallest_subspace, Eigenbasis, EigensolverConfig};

/// The compressed maps `A_V`, `A_V^T` and `C_V = V^T C V`.
pub struct CompressedOperators<'a> {
    problem: &'a SdpProblem,
    pub basis: Eigenbasis,
    /// `V^T C V`.
    pub c_v: DMatrix<f64>,
    /// `||A_V||`.
    pub op_norm_av: f64,
    /// `sigma_min(A_V)` on `Sym^r`; 0 when `r(r+1)/2 > m`.
    pub sigma_min_av: f64,
    /// `r(r+1)/2 > m`, so `A_V` cannot be injective.
    pub structurally_singular: bool,
    /// Gram matrix of `A_V` in [`linalg::svec`] coordinates.
    gram: DMatrix<f64>,
}

impl<'a> CompressedOperators<'a> {
    pub fn problem(&self) -> &SdpProblem {
        self.problem
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        self.basis.v.column(j).iter().copied().collect()
    }

    /// `A(V S V^T)`.
    pub fn forward(&self, s: &DMatrix<f64>) -> Vec<f64> {
        let r = self.rank();
        assert_eq!(s.nrows(), r, "S must be r x r");
        let mut out = vec![0.0; self.problem.m()];
        let (vals, vecs) = linalg::sym_eigen_sorted(s);
        let mut u = vec![0.0; self.basis.n()];
        for (k, &lam) in vals.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            // u = V w_k
            u.iter_mut().for_each(|x| *x = 0.0);
            for j in 0..r {
                let c = vecs[(j, k)];
                for (ui, vij) in u.iter_mut().zip(self.basis.v.column(j).iter()) {
                    *ui += c * vij;
                }
            }
            self.problem.constraints().forward_rank1_add(lam, &u, &u, &mut out);
        }
        out
    }

    /// `V^T (A^T y) V`.
    pub fn adjoint(&self, y: &[f64]) -> DMatrix<f64> {
        let r = self.rank();
        let mut out = DMatrix::zeros(r, r);
        let mut t = vec![0.0; self.basis.n()];
        for j in 0..r {
            let vj = self.column(j);
            self.problem.constraints().adjoint_apply(y, &vj, &mut t);
            for i in 0..r {
                out[(i, j)] = self.basis.v.column(i).iter().zip(&t).map(|(a, b)| a * b).sum();
            }
        }
        linalg::symmetrize(&out)
    }

    /// `A_V` applied to the `k`-th orthonormal basis element of `Sym^r`.
    fn forward_basis(&self, k: usize) -> Vec<f64> {
        let (i, j) = linalg::svec_index(k);
        let vi = self.column(i);
        if i == j {
            self.problem.constraints().forward_rank1(&vi, &vi)
        } else {
            let vj = self.column(j);
            let mut out = self.problem.constraints().forward_rank1(&vi, &vj);
            linalg::scale(std::f64::consts::SQRT_2, &mut out);
            out
        }
    }

    /// `A_V^T A_V` in [`linalg::svec`] coordinates.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `tr(C_V S)`.
    pub fn objective(&self, s: &DMatrix<f64>) -> f64 {
        linalg::frob_inner(&self.c_v, s)
    }

    pub fn residual(&self, s: &DMatrix<f64>, b: &[f64]) -> f64 {
        linalg::norm2(&linalg::sub(&self.forward(s), b))
    }
}

/// Builds the compressed operators for an orthonormal `V`.
pub fn compress(problem: &SdpProblem, basis: Eigenbasis) -> Result<CompressedOperators<'_>> {
    let n = problem.n();
    let r = basis.rank();
    if basis.n() != n || r == 0 {
        return Err(SdpError::Dimension(format!(
            "basis is {} x {r}, problem side is {n}",
            basis.n()
        )));
    }
    let mut c_v = DMatrix::zeros(r, r);
    let mut t = vec![0.0; n];
    for j in 0..r {
        let vj: Vec<f64> = basis.v.column(j).iter().copied().collect();
        problem.cost().apply(&vj, &mut t);
        for i in 0..r {
            c_v[(i, j)] = basis.v.column(i).iter().zip(&t).map(|(a, b)| a * b).sum();
        }
    }
    let c_v = linalg::symmetrize(&c_v);

    let mut ops = CompressedOperators {
        problem,
        basis,
        c_v,
        op_norm_av: 0.0,
        sigma_min_av: 0.0,
        structurally_singular: linalg::sym_dim(r) > problem.m(),
        gram: DMatrix::zeros(0, 0),
    };
    let nd = linalg::sym_dim(r);
    let mut gram = DMatrix::zeros(nd, nd);
    for a in 0..nd {
        let fa = ops.forward_basis(a);
        let col = linalg::svec(&ops.adjoint(&fa));
        for (b, v) in col.into_iter().enumerate() {
            gram[(b, a)] = v;
        }
    }
    let gram = linalg::symmetrize(&gram);
    let (vals, _) = linalg::sym_eigen_sorted(&gram);
    ops.op_norm_av = vals.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    ops.sigma_min_av = if ops.structurally_singular {
        0.0
    } else {
        vals[0].max(0.0).sqrt()
    };
    ops.gram = gram;
    Ok(ops)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Which {
    MinFeas,
    MinObj,
}

/// `X = V S V^T` in factored form.
#[derive(Debug, Clone, Serialize)]
pub struct CompressedSolution {
    #[serde(skip)]
    pub v: DMatrix<f64>,
    #[serde(skip)]
    pub s: DMatrix<f64>,
    pub which: Which,
    /// `||A_V(S) - b||`.
    pub residual: f64,
    /// `tr(C_V S)`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl CompressedSolution {
    pub fn rank(&self) -> usize {
        self.s.nrows()
    }

    /// Dense `V S V^T`. Allocates `n x n`; meant for small instances.
    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.v * &self.s * self.v.transpose()
    }

    /// `tr(X) = tr(S)` since `V` is orthonormal.
    pub fn trace(&self) -> f64 {
        self.s.trace()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ApgConfig {
    pub max_iters: usize,
    /// Stop when the gradient-mapping norm is at most `tol * (1 + ||b||)`.
    pub tol: f64,
    pub restart: usize,
}

impl Default for ApgConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol: 1e-9,
            restart: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CpConfig {
    pub max_iters: usize,
    /// Defaults to `0.99 / ||A_V||`.
    pub tau: Option<f64>,
    /// Defaults to `0.99 / ||A_V||`.
    pub sigma: Option<f64>,
    pub theta: f64,
    /// Stop when both primal-dual residuals are at most `tol * (1 + ||b||)`.
    pub tol: f64,
}

impl Default for CpConfig {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            tau: None,
            sigma: None,
            theta: 1.0,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryConfig {
    pub r: usize,
    /// Inflation of the MinFeas residual used as the MinObj radius.
    pub gamma: f64,
    pub apg: ApgConfig,
    pub cp: CpConfig,
    pub eig: EigensolverConfig,
}

impl RecoveryConfig {
    pub fn new(r: usize) -> Self {
        Self {
            r,
            gamma: 1.1,
            apg: ApgConfig::default(),
            cp: CpConfig::default(),
            eig: EigensolverConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(SdpError::InvalidInput("rank r must be >= 1".into()));
        }
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return Err(SdpError::InvalidInput(format!("gamma = {} must be >= 1", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.cp.theta) {
            return Err(SdpError::InvalidInput(format!("theta = {} must lie in [0, 1]", self.cp.theta)));
        }
        Ok(())
    }
}

/// Largest `r` with `r(r+1)/2 <= m`, capped at `n - 1` and at `cap`.
pub fn default_rank(n: usize, m: usize, cap: Option<usize>) -> usize {
    let mut r = 1;
    while linalg::sym_dim(r + 1) <= m {
        r += 1;
    }
    let mut r = r.min(n.saturating_sub(1)).max(1);
    if let Some(c) = cap {
        r = r.min(c.max(1));
    }
    r
}

/// Accelerated projected gradient on `1/2 ||A_V(S) - b||^2`.
pub fn solve_minfeas(ops: &CompressedOperators, b: &[f64], cfg: &ApgConfig) -> Result<CompressedSolution> {
    let r = ops.rank();
    if b.len() != ops.problem.m() {
        return Err(SdpError::Dimension("b must have length m".into()));
    }
    let nd = linalg::sym_dim(r);
    let lip = ops.op_norm_av * ops.op_norm_av;
    let zero = DMatrix::zeros(r, r);
    if lip == 0.0 {
        return Ok(finish(ops, b, zero, Which::MinFeas, 0, true));
    }
    // gradient = G s - c in svec coordinates
    let g = ops.gram();
    let c = linalg::to_dvector(&linalg::svec(&ops.adjoint(b)));
    let scale = 1.0 + linalg::norm2(b);
    let step = 1.0 / lip;

    let mut s = nalgebra::DVector::<f64>::zeros(nd);
    let mut z = s.clone();
    let mut t = 1.0_f64;
    let mut since_restart = 0;
    let mut converged = false;
    let mut iters = 0;
    for k in 1..=cfg.max_iters.max(1) {
        iters = k;
        let grad = g * &z - &c;
        let trial = &z - step * &grad;
        let s_new = linalg::to_dvector(&linalg::svec(&project_psd(&linalg::smat(trial.as_slice(), r))?));
        let gmap = (&z - &s_new).norm() * lip;
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        since_restart += 1;
        if since_restart >= cfg.restart.max(1) {
            z = s_new.clone();
            t = 1.0;
            since_restart = 0;
        } else {
            z = &s_new + ((t - 1.0) / t_new) * (&s_new - &s);
            t = t_new;
        }
        s = s_new;
        if gmap <= cfg.tol * scale {
            converged = true;
            break;
        }
    }
    let s_mat = project_psd(&linalg::smat(s.as_slice(), r))?;
    Ok(finish(ops, b, s_mat, Which::MinFeas, iters, converged))
}

fn finish(
    ops: &CompressedOperators,
    b: &[f64],
    s: DMatrix<f64>,
    which: Which,
    iterations: usize,
    converged: bool,
) -> CompressedSolution {
    CompressedSolution {
        v: ops.basis.v.clone(),
        residual: ops.residual(&s, b),
        objective: ops.objective(&s),
        s,
        which,
        iterations,
        converged,
    }
}

/// Chambolle-Pock on `min tr(C_V S)` s.t. `||A_V(S) - b|| <= delta`, `S` PSD.
///
/// `minfeas` must be a MinFeas solution for the same operators (it is used to
/// check that the radius is feasible and as a warm start); when `None` one is
/// computed with default settings.
pub fn solve_minobj(
    ops: &CompressedOperators,
    b: &[f64],
    delta: f64,
    cfg: &CpConfig,
    minfeas: Option<&CompressedSolution>,
) -> Result<CompressedSolution> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(SdpError::InvalidInput(format!("radius delta = {delta} must be >= 0")));
    }
    let owned;
    let feas = match minfeas {
        Some(f) => f,
        None => {
            owned = solve_minfeas(ops, b, &ApgConfig::default())?;
            &owned
        }
    };
    let slack = 1e-12 * (1.0 + linalg::norm2(b));
    if feas.residual > delta + slack {
        return Err(SdpError::InfeasibleRadius {
            delta,
            residual: feas.residual,
        });
    }
    let norm = ops.op_norm_av;
    if norm == 0.0 {
        // A_V = 0: every PSD S is feasible, the objective is bounded only
        // when C_V is PSD, in which case S = 0 is optimal.
        let s = DMatrix::zeros(ops.rank(), ops.rank());
        return Ok(finish(ops, b, s, Which::MinObj, 0, true));
    }
    let tau = cfg.tau.unwrap_or(0.99 / norm);
    let sigma = cfg.sigma.unwrap_or(0.99 / norm);
    if tau * sigma * norm * norm > 1.0 + 1e-12 || tau <= 0.0 || sigma <= 0.0 {
        return Err(SdpError::InvalidInput(format!(
            "step sizes violate tau * sigma * ||A_V||^2 <= 1 (tau = {tau}, sigma = {sigma})"
        )));
    }
    let theta = cfg.theta;
    let scale = 1.0 + linalg::norm2(b);
    let m = b.len();

    let mut s = feas.s.clone();
    let mut s_bar = s.clone();
    let mut y = vec![0.0; m];
    let mut converged = false;
    let mut iters = 0;
    for k in 1..=cfg.max_iters.max(1) {
        iters = k;
        // dual step through the Moreau identity
        let a = linalg::sub(&ops.forward(&s_bar), b);
        let probe: Vec<f64> = y.iter().zip(&a).map(|(yi, ai)| yi / sigma + ai).collect();
        let proj = project_ball(&probe, delta);
        let y_new: Vec<f64> = (0..m)
            .map(|i| y[i] + sigma * a[i] - sigma * proj[i])
            .collect();
        // primal step
        let at_y = ops.adjoint(&y_new);
        let s_new = project_psd(&(&s - tau * &at_y - tau * &ops.c_v))?;
        // residuals of the primal-dual optimality system
        let ds = &s - &s_new;
        let dy = linalg::sub(&y, &y_new);
        let p_res = (&ds / tau - ops.adjoint(&dy)).norm();
        let a_ds = ops.forward(&(&s_bar - &s_new));
        let d_res = dy
            .iter()
            .zip(&a_ds)
            .map(|(d, f)| (d / sigma - f).powi(2))
            .sum::<f64>()
            .sqrt();
        s_bar = &s_new + theta * (&s_new - &s);
        s = s_new;
        y = y_new;
        if p_res <= cfg.tol * scale && d_res <= cfg.tol * scale {
            converged = true;
            break;
        }
    }
    // Pull the iterate back into the ball along the segment toward the
    // MinFeas solution, which is feasible.
    let mut sol = finish(ops, b, s, Which::MinObj, iters, converged);
    if sol.residual > delta {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let trial = (1.0 - mid) * &sol.s + mid * &feas.s;
            if ops.residual(&trial, b) <= delta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let s = (1.0 - hi) * &sol.s + hi * &feas.s;
        sol = finish(ops, b, s, Which::MinObj, iters, converged);
    }
    Ok(sol)
}

/// Output of [`recover`].
#[derive(Debug, Clone, Serialize)]
pub struct Recovery {
    pub r: usize,
    pub option: u8,
    pub minfeas: CompressedSolution,
    pub minobj: Option<CompressedSolution>,
    pub delta: Option<f64>,
    /// Threshold `T = lambda_{n-r}(Z(y))` estimate.
    pub threshold: Option<f64>,
    pub ritz_values: Vec<f64>,
    pub sigma_min_av: f64,
    pub op_norm_av: f64,
    pub structurally_singular: bool,
    pub clustered: bool,
    pub eig_converged: bool,
}

impl Recovery {
    /// The solution selected by the recovery option.
    pub fn solution(&self) -> &CompressedSolution {
        self.minobj.as_ref().unwrap_or(&self.minfeas)
    }
}

/// Recovery from a dual vector: `V` from the `r` smallest eigenvectors of
/// `Z(y)`, then MinFeas (option 1) or MinFeas followed by MinObj with
/// `delta = gamma * residual` (option 2).
pub fn recover(problem: &SdpProblem, y: &[f64], option: u8, cfg: &RecoveryConfig) -> Result<Recovery> {
    recover_with_start(problem, y, option, cfg, None)
}

/// [`recover`] with a start vector for the eigensolver.
pub fn recover_with_start(
    problem: &SdpProblem,
    y: &[f64],
    option: u8,
    cfg: &RecoveryConfig,
    start: Option<&[f64]>,
) -> Result<Recovery> {
    cfg.validate()?;
    if option != 1 && option != 2 {
        return Err(SdpError::InvalidInput(format!("recovery option must be 1 or 2, got {option}")));
    }
    if y.len() != problem.m() {
        return Err(SdpError::Dimension(format!("y has length {}, m = {}", y.len(), problem.m())));
    }
    let basis = smallest_subspace(&problem.slack(y), cfg.r, &cfg.eig, start)?;
    let threshold = basis.threshold;
    let ritz_values = basis.ritz_values.clone();
    let clustered = basis.clustered;
    let eig_converged = basis.converged;
    let ops = compress(problem, basis)?;
    let minfeas = solve_minfeas(&ops, problem.b(), &cfg.apg)?;
    let (minobj, delta) = if option == 2 {
        let delta = cfg.gamma * minfeas.residual;
        let sol = solve_minobj(&ops, problem.b(), delta, &cfg.cp, Some(&minfeas))?;
        (Some(sol), Some(delta))
    } else {
        (None, None)
    };
    Ok(Recovery {
        r: cfg.r,
        option,
        minfeas,
        minobj,
        delta,
        threshold,
        ritz_values,
        sigma_min_av: ops.sigma_min_av,
        op_norm_av: ops.op_norm_av,
        structurally_singular: ops.structurally_singular,
        clustered,
        eig_converged,
    })
}
