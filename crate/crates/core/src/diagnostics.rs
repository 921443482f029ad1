//! Quality metrics for a primal-dual pair, conditioning quantities,
//! computable distance bounds, and dense regularity checks for small
//! instances with a reference solution.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, SdpError};
use crate::linalg;
use crate::oracle::{DenseProblem, DenseSolution, RANK_THRESHOLD};
use crate::recovery::{CompressedOperators, CompressedSolution};

/// Slack allowed in [`quadratic_growth_check`] for the reference solution's
/// own residuals.
pub const QG_SLACK: f64 = 1e-8;

/// Quality of `X = V S V^T` and `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityReport {
    /// `tr(CX)`.
    pub primal_objective: f64,
    /// `g_alpha(y)`.
    pub g_alpha: f64,
    /// `tr(CX) + g_alpha(y)`, an upper bound on `tr(CX) - p*` when `y` is
    /// feasible. Negative values mean `X` is superoptimal.
    pub primal_subopt_bound: f64,
    /// `max(||A(X) - b||, 0)`; `X` is PSD by construction.
    pub primal_infeas: f64,
    /// `(-lambda_min(Z(y)))_+`.
    pub dual_infeas: f64,
    pub dimacs_feas: f64,
    pub dimacs_gap: f64,
    pub distance_bound: Option<f64>,
}

/// `g_alpha(y) = -b^T y + alpha (-lambda_min(Z(y)))_+`.
pub fn g_alpha(b: &[f64], y: &[f64], alpha: f64, lambda_min: f64) -> f64 {
    -linalg::dot(b, y) + alpha * (-lambda_min).max(0.0)
}

/// `||A(X) - b|| / (||b|| + 1)`.
pub fn dimacs_feas(residual: f64, b_norm: f64) -> f64 {
    residual / (b_norm + 1.0)
}

/// `|tr(CX) + g| / (|tr(CX)| + |g| + 1)`.
pub fn dimacs_gap(primal_objective: f64, g_val: f64) -> f64 {
    (primal_objective + g_val).abs() / (primal_objective.abs() + g_val.abs() + 1.0)
}

/// Assembles a report from raw scalars.
pub fn quality_from_parts(
    primal_objective: f64,
    residual: f64,
    b: &[f64],
    y: &[f64],
    alpha: f64,
    lambda_min: f64,
) -> QualityReport {
    let g = g_alpha(b, y, alpha, lambda_min);
    QualityReport {
        primal_objective,
        g_alpha: g,
        primal_subopt_bound: primal_objective + g,
        primal_infeas: residual,
        dual_infeas: (-lambda_min).max(0.0),
        dimacs_feas: dimacs_feas(residual, linalg::norm2(b)),
        dimacs_gap: dimacs_gap(primal_objective, g),
        distance_bound: None,
    }
}

/// Quality of a compressed solution, with `tr(CX) = tr(C_V S)` and
/// `A(X) = A_V(S)`. `lambda_min` is `lambda_min(Z(y))`.
pub fn quality(
    ops: &CompressedOperators,
    sol: &CompressedSolution,
    y: &[f64],
    alpha: f64,
    lambda_min: f64,
) -> QualityReport {
    let b = ops.problem().b();
    quality_from_parts(ops.objective(&sol.s), ops.residual(&sol.s, b), b, y, alpha, lambda_min)
}

/// Conditioning of a recovery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditioningReport {
    /// `T = lambda_{n-r}(Z(y))`.
    pub threshold: Option<f64>,
    pub sigma_min_av: f64,
    pub sigma_max_a: f64,
    /// `sigma_max(A) / sigma_min(A_V)`; `None` when `sigma_min(A_V) = 0`.
    pub kappa_v: Option<f64>,
    pub kappa_infinite: bool,
    pub structurally_singular: bool,
    pub clustered: bool,
}

/// `sigma_min(A_V)` and whether it is zero for dimensional reasons.
pub fn sigma_min_av(ops: &CompressedOperators) -> (f64, bool) {
    (ops.sigma_min_av, ops.structurally_singular)
}

pub fn conditioning(ops: &CompressedOperators, sigma_max_a: f64) -> ConditioningReport {
    let kappa = (ops.sigma_min_av > 0.0).then(|| sigma_max_a / ops.sigma_min_av);
    ConditioningReport {
        threshold: ops.basis.threshold,
        sigma_min_av: ops.sigma_min_av,
        sigma_max_a,
        kappa_v: kappa,
        kappa_infinite: kappa.is_none(),
        structurally_singular: ops.structurally_singular,
        clustered: ops.basis.clustered,
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(SdpError::IllPosed(format!(
            "threshold T = {t:e} is not positive: y is far from optimal or the problem is degenerate"
        )))
    }
}

fn check_sigma(sigma_min_av: f64) -> Result<()> {
    if sigma_min_av > 0.0 {
        Ok(())
    } else {
        Err(SdpError::IllPosed(
            "sigma_min(A_V) = 0: y is far from optimal or the primal is degenerate".into(),
        ))
    }
}

/// Inputs to [`distance_bound_minfeas`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    /// Dual suboptimality of a feasible `y`.
    pub eps: f64,
    pub threshold: f64,
    pub sigma_max_a: f64,
    pub sigma_min_av: f64,
    /// Known bound on `||X*||_op`. Derived from `S` when absent.
    pub op_bound: Option<f64>,
    /// `||S||_op` of a MinFeas-feasible `S`.
    pub s_op_norm: f64,
    /// `||A_V(S) - b||`.
    pub delta_s: f64,
}

/// Bound on `||X*||_op` from any `S`: with `phi = (1 + kappa_V) sqrt(eps/T)`
/// and `c = ||S||_op + phi^2/(1 + kappa_V) + delta_S / sigma_min(A_V)`,
/// `||X*||_op <= (phi + sqrt(phi^2 + 2c))^2 / 2`.
pub fn op_norm_bound(inp: &BoundInputs) -> Result<f64> {
    check_threshold(inp.threshold)?;
    check_sigma(inp.sigma_min_av)?;
    let kappa = inp.sigma_max_a / inp.sigma_min_av;
    let phi = (1.0 + kappa) * (inp.eps.max(0.0) / inp.threshold).sqrt();
    let c = inp.s_op_norm + phi * phi / (1.0 + kappa) + inp.delta_s / inp.sigma_min_av;
    let root = phi + (phi * phi + 2.0 * c).sqrt();
    Ok(0.5 * root * root)
}

/// `(1 + kappa_V) (eps/T + sqrt(2 (eps/T) B))`, a bound on the distance from
/// the MinFeas solution to `X*`. Returns the bound and the `B` used.
pub fn distance_bound_minfeas(inp: &BoundInputs) -> Result<(f64, f64)> {
    check_threshold(inp.threshold)?;
    check_sigma(inp.sigma_min_av)?;
    let b = match inp.op_bound {
        Some(b) => b,
        None => op_norm_bound(inp)?,
    };
    let kappa = inp.sigma_max_a / inp.sigma_min_av;
    let q = inp.eps.max(0.0) / inp.threshold;
    Ok(((1.0 + kappa) * (q + (2.0 * q * b).sqrt()), b))
}

/// The infeasibility budget `delta_0 = sigma_max(A) (eps/T + 2 sqrt(2 eps B/T))`
/// and the suboptimality level
/// `eps_0 = min(||C||_F (eps/T + sqrt(2 eps B/T)), ||C||_op (eps/T + sqrt(2 r eps B/T)))`.
pub fn minobj_parameters(
    eps: f64,
    threshold: f64,
    op_bound: f64,
    sigma_max_a: f64,
    r: usize,
    c_fro: f64,
    c_op: f64,
) -> Result<(f64, f64)> {
    check_threshold(threshold)?;
    let q = eps.max(0.0) / threshold;
    let delta0 = sigma_max_a * (q + 2.0 * (2.0 * q * op_bound).sqrt());
    let eps0 = (c_fro * (q + (2.0 * q * op_bound).sqrt())).min(c_op * (q + (2.0 * r as f64 * q * op_bound).sqrt()));
    Ok((delta0, eps0))
}

/// Numerical rank at `RANK_THRESHOLD * ||M||_op`, from ascending eigenvalues.
fn numerical_rank(vals: &[f64]) -> usize {
    let top = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if top == 0.0 {
        return 0;
    }
    vals.iter().filter(|v| v.abs() > RANK_THRESHOLD * top).count()
}

fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    let gram = m.transpose() * m;
    let (vals, _) = linalg::sym_eigen_sorted(&gram);
    vals.first().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Columns `i..` of an ascending eigenvector matrix.
fn tail_columns(vecs: &DMatrix<f64>, from: usize) -> DMatrix<f64> {
    vecs.columns(from, vecs.ncols() - from).into_owned()
}

/// Matrix of `S -> A(W S W^T)` from `Sym^k` in svec coordinates to `R^m`.
fn compressed_map_matrix(dp: &DenseProblem, w: &DMatrix<f64>) -> DMatrix<f64> {
    let k = w.ncols();
    let nd = linalg::sym_dim(k);
    let mut out = DMatrix::zeros(dp.m, nd);
    for c in 0..nd {
        let mut e = vec![0.0; nd];
        e[c] = 1.0;
        let x = w * linalg::smat(&e, k) * w.transpose();
        out.set_column(c, &dp.a_op(&x));
    }
    out
}

/// The map `D(Z, y) = (Z - P Z P, Z + A^T y)`, `P = U U^T`, materialized on
/// `Sym^n x R^m` with svec coordinates on both sides.
pub fn dense_d_operator(dp: &DenseProblem, u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = dp.n;
    let nd = linalg::sym_dim(n);
    let p = u * u.transpose();
    let mut d = DMatrix::zeros(2 * nd, nd + dp.m);
    for c in 0..nd {
        let mut e = vec![0.0; nd];
        e[c] = 1.0;
        let z = linalg::smat(&e, n);
        let top = linalg::svec(&(&z - &p * &z * &p));
        for (r, v) in top.into_iter().enumerate() {
            d[(r, c)] = v;
        }
        d[(nd + c, c)] = 1.0;
    }
    for i in 0..dp.m {
        let col = linalg::svec(&dp.a_matrix(i));
        for (r, v) in col.into_iter().enumerate() {
            d[(nd + r, nd + i)] = v;
        }
    }
    d
}

/// Regularity of a reference solution.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    /// `tr(C X*) - b^T y*`.
    pub strong_duality_gap: f64,
    /// `||X* Z(y*)||_F`.
    pub complementarity_residual: f64,
    pub rank_x: usize,
    pub rank_z: usize,
    pub rank_sum: usize,
    pub n: usize,
    /// `rank_sum < n`.
    pub rank_deficient: bool,
    /// `sigma_min` of `S -> A(N S N^T)` with `N` a basis of `ker Z(y*)`.
    pub sigma_min_primal_face: f64,
    /// `sigma_min` of the map `D` built on `range Z(y*)`.
    pub sigma_min_d: f64,
    /// Largest `||X_k - X*||_F` over the extra solves.
    pub multistart_primal_spread: f64,
    /// Largest `||y_k - y*||` over the extra solves.
    pub multistart_dual_spread: f64,
    pub primal_unique: bool,
    pub dual_unique: bool,
}

/// Tolerance below which a smallest singular value counts as zero.
const SINGULAR_TOL: f64 = 1e-6;
/// Spread between oracle solves above which solutions count as distinct.
const SPREAD_TOL: f64 = 1e-5;

/// Strong duality, complementarity, numerical ranks, and uniqueness of a
/// reference solution. `others` are solves of the same problem from other
/// starting points.
pub fn regularity_probe(dp: &DenseProblem, sol: &DenseSolution, others: &[DenseSolution]) -> RegularityReport {
    let n = dp.n;
    let z = dp.slack(&sol.y);
    let (xv, _) = linalg::sym_eigen_sorted(&sol.x);
    let (zv, zvecs) = linalg::sym_eigen_sorted(&z);
    let rank_x = numerical_rank(&xv);
    let rank_z = numerical_rank(&zv);

    let kernel = zvecs.columns(0, n - rank_z).into_owned();
    let sigma_primal = if kernel.ncols() == 0 {
        f64::INFINITY
    } else {
        smallest_singular_value(&compressed_map_matrix(dp, &kernel))
    };
    let range = tail_columns(&zvecs, n - rank_z);
    let sigma_d = smallest_singular_value(&dense_d_operator(dp, &range));

    let x_scale = 1.0 + sol.x.norm();
    let y_scale = 1.0 + linalg::norm2(&sol.y);
    let primal_spread = others.iter().map(|o| (&o.x - &sol.x).norm()).fold(0.0, f64::max);
    let dual_spread = others
        .iter()
        .map(|o| linalg::norm2(&linalg::sub(&o.y, &sol.y)))
        .fold(0.0, f64::max);

    RegularityReport {
        strong_duality_gap: linalg::frob_inner(&dp.c, &sol.x) - dp.b.dot(&linalg::to_dvector(&sol.y)),
        complementarity_residual: (&sol.x * &z).norm(),
        rank_x,
        rank_z,
        rank_sum: rank_x + rank_z,
        n,
        rank_deficient: rank_x + rank_z < n,
        sigma_min_primal_face: sigma_primal,
        sigma_min_d: sigma_d,
        multistart_primal_spread: primal_spread,
        multistart_dual_spread: dual_spread,
        primal_unique: sigma_primal > SINGULAR_TOL && primal_spread <= SPREAD_TOL * x_scale,
        dual_unique: sigma_d > SINGULAR_TOL && dual_spread <= SPREAD_TOL * y_scale,
    }
}

/// One sample of [`quadratic_growth_check`].
#[derive(Debug, Clone, Serialize)]
pub struct GrowthSample {
    /// `d* - b^T y`.
    pub eps: f64,
    /// `||(Z(y), y) - (Z(y*), y*)||`.
    pub lhs: f64,
    /// `(eps/lambda + sqrt(2 (eps/lambda) ||Z(y)||_op)) / sigma_min(D)`.
    pub rhs: f64,
    /// `None` for a feasible sample, else why it was skipped.
    pub skipped: Option<String>,
    pub holds: bool,
}

/// Result of [`quadratic_growth_check`].
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub sigma_min_d: f64,
    /// Smallest nonzero eigenvalue of `X*`.
    pub lambda_min_pos_x: f64,
    pub z_star_op_norm: f64,
    pub samples: Vec<GrowthSample>,
}

impl GrowthReport {
    pub fn violations(&self) -> usize {
        self.samples.iter().filter(|s| s.skipped.is_none() && !s.holds).count()
    }
}

/// Checks the dual quadratic growth inequality
/// `||(Z(y), y) - (Z(y*), y*)|| <= (eps/lambda + sqrt(2 (eps/lambda) ||Z(y)||_op)) / sigma_min(D)`
/// for every feasible sample, with `lambda` the smallest nonzero eigenvalue
/// of `X*` and `D` materialized densely. Needs strict complementarity.
pub fn quadratic_growth_check(dp: &DenseProblem, sol: &DenseSolution, samples: &[Vec<f64>]) -> Result<GrowthReport> {
    let n = dp.n;
    let (xv, _) = linalg::sym_eigen_sorted(&sol.x);
    let z_star = dp.slack(&sol.y);
    let (zv, zvecs) = linalg::sym_eigen_sorted(&z_star);
    let rank_x = numerical_rank(&xv);
    let rank_z = numerical_rank(&zv);
    if rank_x + rank_z != n {
        return Err(SdpError::IllPosed(format!(
            "rank X* + rank Z(y*) = {} + {} != {n}: strict complementarity fails",
            rank_x, rank_z
        )));
    }
    let u = tail_columns(&zvecs, n - rank_z);
    let sigma_d = smallest_singular_value(&dense_d_operator(dp, &u));
    if sigma_d <= SINGULAR_TOL {
        return Err(SdpError::IllPosed(format!("sigma_min(D) = {sigma_d:e}: dual solution is not unique")));
    }
    let lam = xv[n - rank_x];
    let d_star = dp.b.dot(&linalg::to_dvector(&sol.y));
    let mut out = Vec::with_capacity(samples.len());
    for y in samples {
        if y.len() != dp.m {
            return Err(SdpError::Dimension(format!("sample has length {}, m = {}", y.len(), dp.m)));
        }
        let z = dp.slack(y);
        let (vals, _) = linalg::sym_eigen_sorted(&z);
        if vals[0] < 0.0 {
            out.push(GrowthSample {
                eps: f64::NAN,
                lhs: f64::NAN,
                rhs: f64::NAN,
                skipped: Some(format!("infeasible: lambda_min(Z(y)) = {:e}", vals[0])),
                holds: false,
            });
            continue;
        }
        let eps = (d_star - dp.b.dot(&linalg::to_dvector(y))).max(0.0);
        let z_op = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let dz = (&z - &z_star).norm_squared();
        let dy = linalg::norm2(&linalg::sub(y, &sol.y)).powi(2);
        let lhs = (dz + dy).sqrt();
        let q = eps / lam;
        let rhs = (q + (2.0 * q * z_op).sqrt()) / sigma_d;
        out.push(GrowthSample {
            eps,
            lhs,
            rhs,
            skipped: None,
            holds: lhs <= rhs + QG_SLACK * (1.0 + lhs),
        });
    }
    Ok(GrowthReport {
        sigma_min_d: sigma_d,
        lambda_min_pos_x: lam,
        z_star_op_norm: zv.iter().fold(0.0_f64, |a, v| a.max(v.abs())),
        samples: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::oracle::{solve_dense, DenseOracleConfig};
    use crate::problem::{build_maxcut, WeightedGraph};
    use crate::recovery::{compress, solve_minfeas, ApgConfig};
    use crate::spectral::Eigenbasis;

    fn two_node() -> crate::SdpProblem {
        build_maxcut(&WeightedGraph {
            n: 2,
            edges: vec![(0, 1, 1.0)],
        })
        .unwrap()
    }

    fn two_node_ops(p: &crate::SdpProblem) -> CompressedOperators<'_> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        compress(p, Eigenbasis::from_columns(DMatrix::from_column_slice(2, 1, &[h, -h]))).unwrap()
    }

    #[test]
    fn quality_at_optimum() {
        let p = two_node();
        let ops = two_node_ops(&p);
        let sol = solve_minfeas(&ops, p.b(), &ApgConfig::default()).unwrap();
        assert!((sol.s[(0, 0)] - 2.0).abs() < 1e-8);
        let q = quality(&ops, &sol, &[-2.0, -2.0], 2.2, 0.0);
        assert!(q.primal_subopt_bound.abs() < 1e-8);
        assert!(q.primal_infeas < 1e-8);
        assert!(q.dimacs_gap < 1e-8);
        assert_eq!(q.dual_infeas, 0.0);
    }

    #[test]
    fn quality_of_zero_and_superoptimal() {
        let b = [1.0, 1.0];
        let y = [-2.0, -2.0];
        let q = quality_from_parts(0.0, 2f64.sqrt(), &b, &y, 2.2, 0.0);
        assert!((q.primal_infeas - 2f64.sqrt()).abs() < 1e-15);
        assert!((q.dimacs_feas - 2f64.sqrt() / (2f64.sqrt() + 1.0)).abs() < 1e-15);
        // S = 2.2 along (1,-1)/sqrt2: tr(CX) = -2 * 2.2
        let q = quality_from_parts(-4.4, 0.1 * 2f64.sqrt(), &b, &y, 2.2, 0.0);
        assert!((q.primal_subopt_bound + 0.4).abs() < 1e-12);
    }

    #[test]
    fn sigma_min_examples() {
        let p = two_node();
        let ops = two_node_ops(&p);
        let (s, flag) = sigma_min_av(&ops);
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14 && !flag);
        let q = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let ops = compress(&p, Eigenbasis::from_columns(q)).unwrap();
        assert_eq!(sigma_min_av(&ops), (0.0, true));
        let c = conditioning(&ops, 1.0);
        assert!(c.kappa_infinite && c.kappa_v.is_none());
    }

    fn inputs(eps: f64, t: f64, kappa: f64, b: Option<f64>) -> BoundInputs {
        BoundInputs {
            eps,
            threshold: t,
            sigma_max_a: kappa,
            sigma_min_av: 1.0,
            op_bound: b,
            s_op_norm: 2.0,
            delta_s: 0.0,
        }
    }

    #[test]
    fn distance_bound_examples() {
        assert_eq!(distance_bound_minfeas(&inputs(0.0, 2.0, 1.0, Some(2.0))).unwrap().0, 0.0);
        let (d, _) = distance_bound_minfeas(&inputs(0.02, 2.0, 2f64.sqrt(), Some(2.0))).unwrap();
        assert!((d - (1.0 + 2f64.sqrt()) * 0.21).abs() < 1e-12);
        assert!(matches!(
            distance_bound_minfeas(&inputs(0.02, 0.0, 1.0, Some(2.0))),
            Err(SdpError::IllPosed(_))
        ));
        let mut z = inputs(0.02, 1.0, 1.0, None);
        z.sigma_min_av = 0.0;
        assert!(matches!(distance_bound_minfeas(&z), Err(SdpError::IllPosed(_))));
    }

    #[test]
    fn derived_op_bound_solves_its_inequality() {
        for &(eps, t, kappa, s, ds) in &[(0.02, 2.0, 1.5, 2.0, 0.01), (1e-4, 0.3, 3.0, 10.0, 0.2), (0.0, 1.0, 1.0, 4.0, 0.0)] {
            let inp = BoundInputs {
                eps,
                threshold: t,
                sigma_max_a: kappa,
                sigma_min_av: 1.0,
                op_bound: None,
                s_op_norm: s,
                delta_s: ds,
            };
            let b = op_norm_bound(&inp).unwrap();
            // b is the largest root of x - s = (1+k)(eps/T + sqrt(2 eps x / T)) + ds
            let lhs = b - s;
            let rhs = (1.0 + kappa) * (eps / t + (2.0 * eps * b / t).sqrt()) + ds;
            assert!((lhs - rhs).abs() < 1e-9 * (1.0 + b), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn minobj_parameter_examples() {
        assert_eq!(minobj_parameters(0.0, 1.0, 1.0, 1.0, 1, 1.0, 1.0).unwrap(), (0.0, 0.0));
        let (d0, e0) = minobj_parameters(0.02, 2.0, 2.0, 1.0, 1, 2.0, 2.0).unwrap();
        assert!((d0 - 0.41).abs() < 1e-12);
        assert!((e0 - 0.42).abs() < 1e-12);
        assert!(minobj_parameters(0.1, -1.0, 1.0, 1.0, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn regularity_two_node() {
        let p = two_node();
        let sol = solve_dense(&p, &DenseOracleConfig::default()).unwrap();
        let dp = DenseProblem::from_problem(&p);
        let rep = regularity_probe(&dp, &sol, &[]);
        assert!(rep.strong_duality_gap.abs() < 1e-8);
        assert!(rep.complementarity_residual < 1e-7);
        assert_eq!((rep.rank_x, rep.rank_z, rep.rank_sum), (1, 1, 2));
        assert!(!rep.rank_deficient && rep.primal_unique && rep.dual_unique);
    }

    #[test]
    fn regularity_flags_degenerate_instance() {
        let p = instances::degenerate_instance();
        let sol = solve_dense(&p, &DenseOracleConfig::default()).unwrap();
        let rep = regularity_probe(&DenseProblem::from_problem(&p), &sol, &[]);
        assert_eq!((rep.rank_x, rep.rank_z), (1, 1));
        assert!(rep.rank_deficient);
    }

    #[test]
    fn regularity_trace_toy_is_not_primal_unique() {
        let p = instances::trace_normalization(3);
        let dp = DenseProblem::from_problem(&p);
        let sol = solve_dense(&p, &DenseOracleConfig::default()).unwrap();
        let rep = regularity_probe(&dp, &sol, &[]);
        assert!((sol.p_star - 1.0).abs() < 1e-8);
        assert!(!rep.primal_unique);
        assert!(rep.dual_unique);
    }

    #[test]
    fn quadratic_growth_two_node() {
        let p = two_node();
        let sol = solve_dense(&p, &DenseOracleConfig::default()).unwrap();
        let dp = DenseProblem::from_problem(&p);
        let rep = quadratic_growth_check(&dp, &sol, &[sol.y.clone(), vec![-2.1, -2.1], vec![0.0, 0.0]]).unwrap();
        assert!(rep.samples[0].lhs < 1e-8 && rep.samples[0].rhs < 1e-4);
        assert!(rep.samples[1].holds && rep.samples[1].skipped.is_none());
        assert!(rep.samples[2].skipped.is_some());
        assert_eq!(rep.violations(), 0);
    }

    #[test]
    fn d_operator_is_injective_on_two_node() {
        let p = two_node();
        let dp = DenseProblem::from_problem(&p);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = DMatrix::from_column_slice(2, 1, &[h, h]);
        let d = dense_d_operator(&dp, &u);
        assert_eq!(d.shape(), (6, 5));
        assert!(smallest_singular_value(&d) > 0.1);
    }
}
