//! Dense reference solver for small SDPs.
//!
//! Alternating-direction augmented Lagrangian on the dual
//! `max b^T y  s.t.  A^T y + S = C, S PSD`:
//!
//! ```text
//! y  = (A A^T)^{-1} (mu (b - A(X)) + A(C - S))
//! V  = C - A^T y - mu X
//! S  = P_psd(V),   X = (S - V) / mu
//! ```
//!
//! `X` stays PSD by construction. The run stops once the primal residual,
//! the dual slack floor and the duality gap all certify.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, SdpError};
use crate::linalg;
use crate::problem::SdpProblem;

pub const DEFAULT_MAX_N: usize = 50;
pub const PRIMAL_TOL: f64 = 1e-9;
pub const DUAL_TOL: f64 = 1e-9;
pub const GAP_TOL: f64 = 1e-8;
pub const RANK_THRESHOLD: f64 = 1e-7;

/// `C` and the constraint matrices assembled densely from the oracles.
#[derive(Debug, Clone)]
pub struct DenseProblem {
    pub n: usize,
    pub m: usize,
    pub c: DMatrix<f64>,
    /// `m x n^2`; row `i` is `vec(A_i)`.
    pub amat: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl DenseProblem {
    /// Assembles `C` from `n` cost-oracle calls and each `A_i[p, q]` from
    /// `A((e_p e_q^T + e_q e_p^T)/2)`.
    pub fn from_problem(problem: &SdpProblem) -> Self {
        let n = problem.n();
        let m = problem.m();
        let mut c = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            problem.cost().apply(&e, &mut col);
            for i in 0..n {
                c[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        let mut amat = DMatrix::zeros(m, n * n);
        let mut ep = vec![0.0; n];
        let mut eq = vec![0.0; n];
        for p in 0..n {
            ep[p] = 1.0;
            for q in p..n {
                eq[q] = 1.0;
                let a = problem.constraints().forward_rank1(&ep, &eq);
                for (i, v) in a.iter().enumerate() {
                    if *v != 0.0 {
                        amat[(i, p + q * n)] = *v;
                        amat[(i, q + p * n)] = *v;
                    }
                }
                eq[q] = 0.0;
            }
            ep[p] = 0.0;
        }
        Self {
            n,
            m,
            c: linalg::symmetrize(&c),
            amat,
            b: DVector::from_column_slice(problem.b()),
        }
    }

    pub fn a_op(&self, x: &DMatrix<f64>) -> DVector<f64> {
        &self.amat * DVector::from_column_slice(x.as_slice())
    }

    pub fn at_op(&self, y: &[f64]) -> DMatrix<f64> {
        let v = self.amat.transpose() * DVector::from_column_slice(y);
        DMatrix::from_column_slice(self.n, self.n, v.as_slice())
    }

    /// `Z(y) = C - A^T y`.
    pub fn slack(&self, y: &[f64]) -> DMatrix<f64> {
        linalg::symmetrize(&(&self.c - self.at_op(y)))
    }

    /// `A_i` as a dense matrix.
    pub fn a_matrix(&self, i: usize) -> DMatrix<f64> {
        let row: Vec<f64> = self.amat.row(i).iter().copied().collect();
        DMatrix::from_column_slice(self.n, self.n, &row)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DenseOracleConfig {
    pub max_n: usize,
    pub max_iters: usize,
    pub mu0: f64,
    /// Random initial `X`, `S` instead of zeros.
    pub start_seed: Option<u64>,
}

impl Default for DenseOracleConfig {
    fn default() -> Self {
        Self {
            max_n: DEFAULT_MAX_N,
            max_iters: 200_000,
            mu0: 1.0,
            start_seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DenseSolution {
    #[serde(skip)]
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    pub p_star: f64,
    pub d_star: f64,
    /// `||A(X) - b||`.
    pub primal_residual: f64,
    /// `(-lambda_min(Z(y)))_+`.
    pub dual_residual: f64,
    pub z_lambda_min: f64,
    /// `p_star - d_star`.
    pub gap: f64,
    pub iterations: usize,
}

impl DenseSolution {
    /// Whether the residual invariants hold for right-hand side norm `b_norm`.
    pub fn certified(&self, b_norm: f64) -> bool {
        self.primal_residual <= PRIMAL_TOL * (1.0 + b_norm)
            && self.z_lambda_min >= -DUAL_TOL
            && self.gap.abs() <= GAP_TOL * (1.0 + self.p_star.abs())
    }
}

/// Solves a small SDP to high accuracy.
pub fn solve_dense(problem: &SdpProblem, cfg: &DenseOracleConfig) -> Result<DenseSolution> {
    let n = problem.n();
    if n > cfg.max_n {
        return Err(SdpError::SizeLimit { n, limit: cfg.max_n });
    }
    if problem.m() > cfg.max_n * cfg.max_n {
        return Err(SdpError::InvalidInput(format!(
            "m = {} exceeds {} for the dense solver",
            problem.m(),
            cfg.max_n * cfg.max_n
        )));
    }
    let dp = DenseProblem::from_problem(problem);
    solve_dense_problem(&dp, cfg)
}

/// [`solve_dense`] on already-assembled data.
pub fn solve_dense_problem(dp: &DenseProblem, cfg: &DenseOracleConfig) -> Result<DenseSolution> {
    let n = dp.n;
    let b = &dp.b;
    let b_norm = b.norm();
    let gram = &dp.amat * dp.amat.transpose();
    let chol = Cholesky::new(gram)
        .ok_or_else(|| SdpError::OracleFailure("constraint matrices are linearly dependent".into()))?;
    let c_norm = dp.c.norm();

    let (mut x, mut s) = match cfg.start_seed {
        None => (DMatrix::zeros(n, n), DMatrix::zeros(n, n)),
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = DMatrix::from_vec(n, n, linalg::gaussian_vector(&mut rng, n * n));
            let u = DMatrix::from_vec(n, n, linalg::gaussian_vector(&mut rng, n * n));
            ((&w * w.transpose()) / n as f64, (&u * u.transpose()) / n as f64)
        }
    };
    let mut mu = cfg.mu0;
    let mut y = DVector::zeros(dp.m);
    let mut iters = 0;
    let mut check_every = 10;
    for k in 1..=cfg.max_iters {
        iters = k;
        let rhs = mu * (b - dp.a_op(&x)) + dp.a_op(&(&dp.c - &s));
        y = chol.solve(&rhs);
        let aty = dp.at_op(y.as_slice());
        let v = linalg::symmetrize(&(&dp.c - &aty - mu * &x));
        let (vals, vecs) = linalg::sym_eigen_sorted(&v);
        let mut s_new = DMatrix::zeros(n, n);
        let mut x_new = DMatrix::zeros(n, n);
        for (i, &lam) in vals.iter().enumerate() {
            let u = vecs.column(i);
            if lam > 0.0 {
                s_new += lam * u * u.transpose();
            } else if lam < 0.0 {
                x_new -= (lam / mu) * u * u.transpose();
            }
        }
        x = x_new;
        s = s_new;

        let p_res = (dp.a_op(&x) - b).norm();
        let d_res = (&dp.c - &aty - &s).norm();
        if !(x.norm().is_finite() && y.norm().is_finite()) || x.norm() > 1e12 || y.norm() > 1e12 {
            return Err(SdpError::OracleFailure(format!(
                "iterates diverge at iteration {k}: the problem looks infeasible or unbounded"
            )));
        }
        // residual balancing
        if k % 10 == 0 {
            let rp = p_res / (1.0 + b_norm);
            let rd = d_res / (1.0 + c_norm);
            if rp > 5.0 * rd {
                mu = (mu * 1.6).min(1e6);
            } else if rd > 5.0 * rp {
                mu = (mu / 1.6).max(1e-6);
            }
        }
        if k % check_every == 0 {
            check_every = 10;
            if p_res <= 0.1 * PRIMAL_TOL * (1.0 + b_norm) && d_res <= 1e-10 * (1.0 + c_norm) {
                let sol = finalize(dp, &x, y.as_slice(), iters);
                if sol.certified(b_norm) {
                    return Ok(sol);
                }
            }
        }
    }
    let sol = finalize(dp, &x, y.as_slice(), iters);
    if sol.certified(b_norm) {
        Ok(sol)
    } else {
        Err(SdpError::OracleFailure(format!(
            "no certificate after {iters} iterations (primal {:.2e}, dual floor {:.2e}, gap {:.2e})",
            sol.primal_residual, sol.z_lambda_min, sol.gap
        )))
    }
}

fn finalize(dp: &DenseProblem, x: &DMatrix<f64>, y: &[f64], iterations: usize) -> DenseSolution {
    let x = linalg::symmetrize(x);
    let p_star = linalg::frob_inner(&dp.c, &x);
    let d_star = dp.b.dot(&DVector::from_column_slice(y));
    let z_min = linalg::min_eigenvalue(&dp.slack(y));
    DenseSolution {
        primal_residual: (dp.a_op(&x) - &dp.b).norm(),
        x,
        y: y.to_vec(),
        p_star,
        d_star,
        dual_residual: (-z_min).max(0.0),
        z_lambda_min: z_min,
        gap: p_star - d_star,
        iterations,
    }
}

/// Numerical rank of `X*` at `RANK_THRESHOLD * lambda_max` and the matching
/// top eigenvectors (`n x r`).
pub fn enumerate_solution_rank(solution: &DenseSolution) -> (usize, DMatrix<f64>) {
    let (vals, vecs) = linalg::sym_eigen_sorted(&solution.x);
    let n = vals.len();
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let r = vals.iter().filter(|&&v| v > RANK_THRESHOLD * top && v > 0.0).count();
    let mut v = DMatrix::zeros(n, r);
    for k in 0..r {
        v.set_column(k, &vecs.column(n - 1 - k));
    }
    (r, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::*;

    fn two_node() -> SdpProblem {
        build_maxcut(&WeightedGraph {
            n: 2,
            edges: vec![(0, 1, 1.0)],
        })
        .unwrap()
    }

    pub(crate) fn trace_toy(n: usize) -> SdpProblem {
        let id = SparseSymmetric::from_triplets(n, &(0..n).map(|i| (i, i, 1.0)).collect::<Vec<_>>()).unwrap();
        SdpProblem::new(
            CostOracle::Identity { n },
            ConstraintMap::GenericSparse { n, mats: vec![id] },
            vec![1.0],
            None,
        )
        .unwrap()
    }

    #[test]
    fn two_node_hand_solution() {
        let sol = solve_dense(&two_node(), &DenseOracleConfig::default()).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!((&sol.x - want).norm() < 1e-8);
        assert!((sol.y[0] + 2.0).abs() < 1e-8 && (sol.y[1] + 2.0).abs() < 1e-8);
        assert!((sol.p_star + 4.0).abs() < 1e-8 && (sol.d_star + 4.0).abs() < 1e-8);
        let (r, v) = enumerate_solution_rank(&sol);
        assert_eq!(r, 1);
        assert!((v[(0, 0)] + v[(1, 0)]).abs() < 1e-8);
    }

    #[test]
    fn trace_normalization() {
        let sol = solve_dense(&trace_toy(4), &DenseOracleConfig::default()).unwrap();
        assert!((sol.p_star - 1.0).abs() < 1e-8);
        // from the zero start the iterates stay multiples of I
        assert!((&sol.x - DMatrix::identity(4, 4) * 0.25).norm() < 1e-8);
        assert_eq!(enumerate_solution_rank(&sol).0, 4);
    }

    #[test]
    fn size_limit() {
        let g = WeightedGraph { n: 51, edges: vec![(0, 1, 1.0)] };
        let err = solve_dense(&build_maxcut(&g).unwrap(), &DenseOracleConfig::default());
        assert!(matches!(err, Err(SdpError::SizeLimit { n: 51, limit: 50 })));
    }

    #[test]
    fn dense_assembly_matches_oracles() {
        let p = build_matrix_completion(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        let dp = DenseProblem::from_problem(&p);
        let a0 = dp.a_matrix(0);
        assert_eq!(a0[(0, 2)], 0.5);
        assert_eq!(a0[(2, 0)], 0.5);
        assert_eq!(a0.iter().filter(|v| **v != 0.0).count(), 2);
        assert_eq!(dp.c, DMatrix::identity(4, 4));
    }
}
