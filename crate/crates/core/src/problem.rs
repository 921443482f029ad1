//! SDP data model: the cost oracle `u -> Cu`, the constraint map with its
//! rank-one forward action and adjoint action, the slack operator
//! `Z(y) = C - A^T y`, and builders for Max-Cut and matrix completion.
//!
//! Everything here is matrix-free; no routine allocates an `n x n` buffer.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, SdpError};
use crate::linalg::{self, SymmetricOperator};

/// Symmetric sparse matrix in compressed-row form, both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    /// Builds from `(i, j, v)` triplets, 0-based. Each triplet contributes `v`
    /// at `(i, j)` and, when `i != j`, at `(j, i)`. Duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(SdpError::InvalidInput(format!(
                    "entry ({i}, {j}) out of range for n = {n}"
                )));
            }
            if !v.is_finite() {
                return Err(SdpError::NonFinite("sparse matrix entry"));
            }
            *acc.entry((i, j)).or_insert(0.0) += v;
            if i != j {
                *acc.entry((j, i)).or_insert(0.0) += v;
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(acc.len());
        let mut values = Vec::with_capacity(acc.len());
        for (&(i, j), &v) in &acc {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds from raw CSR arrays without checking symmetry.
    ///
    /// Used to inject faults into the adjoint-consistency check.
    pub fn from_csr_unchecked(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(row_ptr.len(), n + 1);
        assert_eq!(col_idx.len(), values.len());
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn into_csr(self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        (self.row_ptr, self.col_idx, self.values)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over stored `(i, j, v)` entries (both triangles).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    /// `out <- out + alpha M u`
    pub fn apply_add(&self, alpha: f64, u: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * u[self.col_idx[k]];
            }
            *o += alpha * acc;
        }
    }

    /// `tr(M (u v^T + v u^T) / 2)`.
    pub fn sym_bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, j, a) in self.entries() {
            acc += a * (u[i] * v[j] + v[i] * u[j]);
        }
        0.5 * acc
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Representation tag of a [`CostOracle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    SparseSymmetric,
    NegatedLaplacian,
    Identity,
}

/// The map `u -> C u`.
#[derive(Debug, Clone)]
pub enum CostOracle {
    SparseSymmetric(SparseSymmetric),
    /// `C = -(D - W)` for a weighted graph with adjacency `W` and degrees `D`.
    NegatedLaplacian {
        adjacency: SparseSymmetric,
        degree: Vec<f64>,
    },
    Identity {
        n: usize,
    },
}

impl CostOracle {
    pub fn dim(&self) -> usize {
        match self {
            CostOracle::SparseSymmetric(m) => m.dim(),
            CostOracle::NegatedLaplacian { degree, .. } => degree.len(),
            CostOracle::Identity { n } => *n,
        }
    }

    pub fn kind(&self) -> CostKind {
        match self {
            CostOracle::SparseSymmetric(_) => CostKind::SparseSymmetric,
            CostOracle::NegatedLaplacian { .. } => CostKind::NegatedLaplacian,
            CostOracle::Identity { .. } => CostKind::Identity,
        }
    }

    /// `out <- C u`
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        self.apply_add(1.0, u, out);
    }

    /// `out <- out + alpha C u`
    pub fn apply_add(&self, alpha: f64, u: &[f64], out: &mut [f64]) {
        match self {
            CostOracle::SparseSymmetric(m) => m.apply_add(alpha, u, out),
            CostOracle::NegatedLaplacian { adjacency, degree } => {
                // -L u = W u - D u
                adjacency.apply_add(alpha, u, out);
                for ((o, d), ui) in out.iter_mut().zip(degree).zip(u) {
                    *o -= alpha * d * ui;
                }
            }
            CostOracle::Identity { .. } => linalg::axpy(alpha, u, out),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            CostOracle::SparseSymmetric(m) => m.frobenius_sq().sqrt(),
            CostOracle::NegatedLaplacian { adjacency, degree } => {
                (adjacency.frobenius_sq() + degree.iter().map(|d| d * d).sum::<f64>()).sqrt()
            }
            CostOracle::Identity { n } => (*n as f64).sqrt(),
        }
    }
}

/// Representation tag of a [`ConstraintMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    GenericSparse,
    DiagEquality,
    EntryObservation,
}

/// The linear map `A: Sym^n -> R^m`, `[A(X)]_i = tr(A_i X)`.
#[derive(Debug, Clone)]
pub enum ConstraintMap {
    GenericSparse {
        n: usize,
        mats: Vec<SparseSymmetric>,
    },
    /// `A(X) = diag(X)`, `m = n`.
    DiagEquality { n: usize },
    /// `A_k = (E_ab + E_ba) / 2` with `a < n1 <= b` in the lifted
    /// `(n1 + n2) x (n1 + n2)` matrix.
    EntryObservation {
        n1: usize,
        n2: usize,
        pairs: Vec<(usize, usize)>,
    },
}

impl ConstraintMap {
    pub fn dim(&self) -> usize {
        match self {
            ConstraintMap::GenericSparse { n, .. } => *n,
            ConstraintMap::DiagEquality { n } => *n,
            ConstraintMap::EntryObservation { n1, n2, .. } => n1 + n2,
        }
    }

    pub fn num_constraints(&self) -> usize {
        match self {
            ConstraintMap::GenericSparse { mats, .. } => mats.len(),
            ConstraintMap::DiagEquality { n } => *n,
            ConstraintMap::EntryObservation { pairs, .. } => pairs.len(),
        }
    }

    pub fn kind(&self) -> ConstraintKind {
        match self {
            ConstraintMap::GenericSparse { .. } => ConstraintKind::GenericSparse,
            ConstraintMap::DiagEquality { .. } => ConstraintKind::DiagEquality,
            ConstraintMap::EntryObservation { .. } => ConstraintKind::EntryObservation,
        }
    }

    /// `A((u v^T + v u^T) / 2)`.
    pub fn forward_rank1(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_constraints()];
        self.forward_rank1_add(1.0, u, v, &mut out);
        out
    }

    /// `out <- out + alpha A((u v^T + v u^T) / 2)`.
    pub fn forward_rank1_add(&self, alpha: f64, u: &[f64], v: &[f64], out: &mut [f64]) {
        match self {
            ConstraintMap::GenericSparse { mats, .. } => {
                for (o, a) in out.iter_mut().zip(mats) {
                    *o += alpha * a.sym_bilinear(u, v);
                }
            }
            ConstraintMap::DiagEquality { .. } => {
                for ((o, ui), vi) in out.iter_mut().zip(u).zip(v) {
                    *o += alpha * ui * vi;
                }
            }
            ConstraintMap::EntryObservation { pairs, .. } => {
                for (o, &(a, b)) in out.iter_mut().zip(pairs) {
                    *o += alpha * 0.5 * (u[a] * v[b] + v[a] * u[b]);
                }
            }
        }
    }

    /// `out <- (A^T y) u`.
    pub fn adjoint_apply(&self, y: &[f64], u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        self.adjoint_apply_add(1.0, y, u, out);
    }

    /// `out <- out + alpha (A^T y) u`.
    pub fn adjoint_apply_add(&self, alpha: f64, y: &[f64], u: &[f64], out: &mut [f64]) {
        match self {
            ConstraintMap::GenericSparse { mats, .. } => {
                for (yi, a) in y.iter().zip(mats) {
                    if *yi != 0.0 {
                        a.apply_add(alpha * yi, u, out);
                    }
                }
            }
            ConstraintMap::DiagEquality { .. } => {
                for ((o, yi), ui) in out.iter_mut().zip(y).zip(u) {
                    *o += alpha * yi * ui;
                }
            }
            ConstraintMap::EntryObservation { pairs, .. } => {
                for (yk, &(a, b)) in y.iter().zip(pairs) {
                    let s = 0.5 * alpha * yk;
                    out[a] += s * u[b];
                    out[b] += s * u[a];
                }
            }
        }
    }

    /// `A(A^T y)`, the Gram operator of the constraint map.
    pub fn gram_apply(&self, y: &[f64]) -> Vec<f64> {
        match self {
            ConstraintMap::GenericSparse { mats, .. } => {
                let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
                for (yi, a) in y.iter().zip(mats) {
                    if *yi == 0.0 {
                        continue;
                    }
                    for (i, j, v) in a.entries() {
                        *acc.entry((i, j)).or_insert(0.0) += yi * v;
                    }
                }
                mats.iter()
                    .map(|a| {
                        a.entries()
                            .map(|(i, j, v)| v * acc.get(&(i, j)).copied().unwrap_or(0.0))
                            .sum()
                    })
                    .collect()
            }
            ConstraintMap::DiagEquality { .. } => y.to_vec(),
            ConstraintMap::EntryObservation { .. } => y.iter().map(|v| 0.5 * v).collect(),
        }
    }
}

/// A standard-form SDP: minimize `tr(CX)` subject to `A(X) = b`, `X` PSD.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    cost: CostOracle,
    constraints: ConstraintMap,
    b: Vec<f64>,
    trace_hint: Option<f64>,
}

impl SdpProblem {
    pub fn new(
        cost: CostOracle,
        constraints: ConstraintMap,
        b: Vec<f64>,
        trace_hint: Option<f64>,
    ) -> Result<Self> {
        let n = cost.dim();
        if n == 0 {
            return Err(SdpError::InvalidInput("n must be at least 1".into()));
        }
        if constraints.dim() != n {
            return Err(SdpError::Dimension(format!(
                "cost has side {n} but constraints act on side {}",
                constraints.dim()
            )));
        }
        let m = constraints.num_constraints();
        if m == 0 {
            return Err(SdpError::InvalidInput("at least one constraint is required".into()));
        }
        if b.len() != m {
            return Err(SdpError::Dimension(format!(
                "right-hand side has length {} but there are {m} constraints",
                b.len()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(SdpError::NonFinite("right-hand side"));
        }
        if let Some(t) = trace_hint {
            if !(t.is_finite() && t >= 0.0) {
                return Err(SdpError::InvalidInput(format!("trace hint {t} must be >= 0")));
            }
        }
        Ok(Self {
            cost,
            constraints,
            b,
            trace_hint,
        })
    }

    pub fn n(&self) -> usize {
        self.cost.dim()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn cost(&self) -> &CostOracle {
        &self.cost
    }

    pub fn constraints(&self) -> &ConstraintMap {
        &self.constraints
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn trace_hint(&self) -> Option<f64> {
        self.trace_hint
    }

    pub fn with_trace_hint(mut self, hint: Option<f64>) -> Self {
        self.trace_hint = hint;
        self
    }

    /// True when every feasible `X` has the same trace (`tr X = trace_hint`).
    pub fn has_constant_trace(&self) -> bool {
        matches!(self.constraints, ConstraintMap::DiagEquality { .. })
    }

    pub fn slack<'a>(&'a self, y: &'a [f64]) -> SlackOperator<'a> {
        SlackOperator::new(self, y, 1.0)
    }
}

/// `u -> sign * (C - A^T y) u`.
#[derive(Debug, Clone, Copy)]
pub struct SlackOperator<'a> {
    problem: &'a SdpProblem,
    y: &'a [f64],
    sign: f64,
}

impl<'a> SlackOperator<'a> {
    pub fn new(problem: &'a SdpProblem, y: &'a [f64], sign: f64) -> Self {
        assert_eq!(y.len(), problem.m(), "dual vector length must equal m");
        assert!(sign == 1.0 || sign == -1.0, "sign must be +1 or -1");
        Self { problem, y, sign }
    }

    pub fn negated(self) -> Self {
        Self {
            sign: -self.sign,
            ..self
        }
    }

    pub fn y(&self) -> &[f64] {
        self.y
    }
}

impl SymmetricOperator for SlackOperator<'_> {
    fn dim(&self) -> usize {
        self.problem.n()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.problem.cost.apply(x, out);
        self.problem
            .constraints
            .adjoint_apply_add(-1.0, self.y, x, out);
        if self.sign < 0.0 {
            linalg::scale(-1.0, out);
        }
    }
}

/// Weighted undirected graph with 0-based vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

/// Max-Cut relaxation: minimize `tr(-L X)` subject to `diag(X) = 1`.
pub fn build_maxcut(graph: &WeightedGraph) -> Result<SdpProblem> {
    let n = graph.n;
    if n < 2 {
        return Err(SdpError::InvalidInput(format!("Max-Cut needs n >= 2, got {n}")));
    }
    for (k, &(i, j, w)) in graph.edges.iter().enumerate() {
        if i >= n || j >= n {
            return Err(SdpError::InvalidInput(format!(
                "edge {k}: vertex out of range ({}, {}) for n = {n}",
                i + 1,
                j + 1
            )));
        }
        if i == j {
            return Err(SdpError::Format {
                line: k + 1,
                msg: format!("self-loop on vertex {}", i + 1),
            });
        }
        if !w.is_finite() || w < 0.0 {
            return Err(SdpError::InvalidInput(format!("edge {k}: weight {w} must be >= 0")));
        }
    }
    let adjacency = SparseSymmetric::from_triplets(n, &graph.edges)?;
    let mut degree = vec![0.0; n];
    for (i, _, w) in adjacency.entries() {
        degree[i] += w;
    }
    SdpProblem::new(
        CostOracle::NegatedLaplacian { adjacency, degree },
        ConstraintMap::DiagEquality { n },
        vec![1.0; n],
        Some(n as f64),
    )
}

/// Lifted matrix completion: minimize `tr(W1) + tr(W2)` subject to the
/// observed entries of the off-diagonal block. Indices are 0-based
/// (`i < n1`, `j < n2`). The trace hint is left unset.
pub fn build_matrix_completion(
    n1: usize,
    n2: usize,
    observations: &[(usize, usize, f64)],
) -> Result<SdpProblem> {
    if n1 == 0 || n2 == 0 {
        return Err(SdpError::InvalidInput("n1 and n2 must be positive".into()));
    }
    if observations.is_empty() {
        return Err(SdpError::InvalidInput("at least one observation is required".into()));
    }
    let mut seen = std::collections::HashSet::with_capacity(observations.len());
    let mut pairs = Vec::with_capacity(observations.len());
    let mut b = Vec::with_capacity(observations.len());
    for &(i, j, v) in observations {
        if i >= n1 || j >= n2 {
            return Err(SdpError::InvalidInput(format!(
                "observation ({}, {}) outside {n1} x {n2}",
                i + 1,
                j + 1
            )));
        }
        if !seen.insert((i, j)) {
            return Err(SdpError::InvalidInput(format!(
                "duplicate observation ({}, {})",
                i + 1,
                j + 1
            )));
        }
        pairs.push((i, n1 + j));
        b.push(v);
    }
    SdpProblem::new(
        CostOracle::Identity { n: n1 + n2 },
        ConstraintMap::EntryObservation { n1, n2, pairs },
        b,
        None,
    )
}

/// Outcome of [`adjoint_consistency_check`].
#[derive(Debug, Clone, Serialize)]
pub struct AdjointReport {
    pub probes: usize,
    pub max_adjoint_violation: f64,
    pub max_cost_symmetry_violation: f64,
    pub max_cost_linearity_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const ADJOINT_TOL: f64 = 1e-10;

/// Probes `<A((uv^T + vu^T)/2), y> = u^T (A^T y) v`, symmetry and linearity
/// of the cost oracle on random draws. Violations are relative.
pub fn adjoint_consistency_check(problem: &SdpProblem, probes: usize, seed: u64) -> AdjointReport {
    let n = problem.n();
    let m = problem.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = 0.0_f64;
    let mut sym = 0.0_f64;
    let mut lin = 0.0_f64;
    let mut aty_v = vec![0.0; n];
    let mut cu = vec![0.0; n];
    let mut cv = vec![0.0; n];
    let mut cw = vec![0.0; n];
    for _ in 0..probes.max(1) {
        let u = linalg::random_unit_vector(&mut rng, n);
        let v = linalg::random_unit_vector(&mut rng, n);
        let y = linalg::random_unit_vector(&mut rng, m);

        let aw = problem.constraints.forward_rank1(&u, &v);
        let lhs = linalg::dot(&aw, &y);
        problem.constraints.adjoint_apply(&y, &v, &mut aty_v);
        let rhs = linalg::dot(&u, &aty_v);
        let scale = linalg::norm2(&aw) + linalg::norm2(&aty_v) + f64::MIN_POSITIVE;
        adj = adj.max((lhs - rhs).abs() / scale);

        problem.cost.apply(&u, &mut cu);
        problem.cost.apply(&v, &mut cv);
        let s = linalg::norm2(&cu) + linalg::norm2(&cv) + f64::MIN_POSITIVE;
        sym = sym.max((linalg::dot(&v, &cu) - linalg::dot(&u, &cv)).abs() / s);

        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.3 * a - 1.7 * b).collect();
        problem.cost.apply(&w, &mut cw);
        let mut err = 0.0_f64;
        for i in 0..n {
            err = err.max((cw[i] - (0.3 * cu[i] - 1.7 * cv[i])).abs());
        }
        lin = lin.max(err / s);
    }
    let passed = adj <= ADJOINT_TOL && sym <= ADJOINT_TOL && lin <= ADJOINT_TOL;
    AdjointReport {
        probes: probes.max(1),
        max_adjoint_violation: adj,
        max_cost_symmetry_violation: sym,
        max_cost_linearity_violation: lin,
        tolerance: ADJOINT_TOL,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> SdpProblem {
        build_maxcut(&WeightedGraph {
            n: 2,
            edges: vec![(0, 1, 1.0)],
        })
        .unwrap()
    }

    fn apply_cost(p: &SdpProblem, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.n()];
        p.cost().apply(u, &mut out);
        out
    }

    #[test]
    fn single_edge_laplacian() {
        let p = single_edge();
        assert_eq!(p.b(), &[1.0, 1.0]);
        assert_eq!(p.trace_hint(), Some(2.0));
        // C = -L = [[-1, 1], [1, -1]]
        assert_eq!(apply_cost(&p, &[1.0, 0.0]), vec![-1.0, 1.0]);
        assert_eq!(apply_cost(&p, &[0.0, 1.0]), vec![1.0, -1.0]);
    }

    #[test]
    fn triangle_matches_dense_laplacian() {
        let p = build_maxcut(&WeightedGraph {
            n: 3,
            edges: vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
        })
        .unwrap();
        // dense L = 3I - J for the unit triangle
        let l = [[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]];
        let u = [0.3, -1.2, 2.5];
        let cu = apply_cost(&p, &u);
        for i in 0..3 {
            let lu: f64 = (0..3).map(|j| l[i][j] * u[j]).sum();
            assert!((cu[i] + lu).abs() < 1e-14);
        }
        assert_eq!(p.b(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn empty_graph_has_zero_cost() {
        let p = build_maxcut(&WeightedGraph { n: 3, edges: vec![] }).unwrap();
        assert_eq!(apply_cost(&p, &[1.0, 2.0, 3.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(p.b(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn duplicate_edges_are_summed() {
        let p = build_maxcut(&WeightedGraph {
            n: 2,
            edges: vec![(0, 1, 1.0), (1, 0, 2.0)],
        })
        .unwrap();
        assert_eq!(apply_cost(&p, &[1.0, 0.0]), vec![-3.0, 3.0]);
    }

    #[test]
    fn maxcut_rejects_bad_graphs() {
        let self_loop = WeightedGraph {
            n: 3,
            edges: vec![(1, 1, 1.0)],
        };
        assert!(matches!(build_maxcut(&self_loop), Err(SdpError::Format { .. })));
        let out_of_range = WeightedGraph {
            n: 2,
            edges: vec![(0, 2, 1.0)],
        };
        assert!(build_maxcut(&out_of_range).is_err());
        let negative = WeightedGraph {
            n: 2,
            edges: vec![(0, 1, -1.0)],
        };
        assert!(build_maxcut(&negative).is_err());
        assert!(build_maxcut(&WeightedGraph { n: 1, edges: vec![] }).is_err());
    }

    #[test]
    fn diag_map_forward_is_hadamard() {
        let p = single_edge();
        let u = [0.5, -3.0];
        assert_eq!(p.constraints().forward_rank1(&u, &u), vec![0.25, 9.0]);
    }

    #[test]
    fn single_observation_completion() {
        let p = build_matrix_completion(1, 1, &[(0, 0, 3.0)]).unwrap();
        assert_eq!(p.m(), 1);
        assert_eq!(p.n(), 2);
        assert_eq!(p.b(), &[3.0]);
        let u = [2.0, 5.0];
        let v = [7.0, 11.0];
        let a = p.constraints().forward_rank1(&u, &v);
        assert_eq!(a, vec![0.5 * (2.0 * 11.0 + 5.0 * 7.0)]);
        assert_eq!(p.trace_hint(), None);
        assert_eq!(apply_cost(&p, &u), u.to_vec());
    }

    #[test]
    fn two_by_two_completion_against_dense_assembly() {
        let p = build_matrix_completion(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        assert_eq!((p.n(), p.m()), (4, 2));
        // dense A_1 = (E_{0,2} + E_{2,0})/2, A_2 = (E_{1,3} + E_{3,1})/2
        let dense = |k: usize, i: usize, j: usize| -> f64 {
            let (a, b) = [(0, 2), (1, 3)][k];
            if (i, j) == (a, b) || (i, j) == (b, a) {
                0.5
            } else {
                0.0
            }
        };
        let e = |i: usize| {
            let mut v = vec![0.0; 4];
            v[i] = 1.0;
            v
        };
        let fwd = p.constraints().forward_rank1(&e(0), &e(2));
        let mut expect = [0.0; 2];
        for (k, ex) in expect.iter_mut().enumerate() {
            // tr(A_k (e0 e2^T + e2 e0^T)/2)
            *ex = 0.5 * (dense(k, 2, 0) + dense(k, 0, 2));
        }
        assert_eq!(fwd, expect.to_vec());
        assert_eq!(fwd, vec![0.5, 0.0]);
    }

    #[test]
    fn completion_rejects_duplicates_and_empty() {
        assert!(build_matrix_completion(2, 2, &[]).is_err());
        assert!(build_matrix_completion(2, 2, &[(0, 1, 1.0), (0, 1, 2.0)]).is_err());
        assert!(build_matrix_completion(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn entry_observation_pairs_are_lifted() {
        let p = build_matrix_completion(3, 2, &[(2, 1, 1.0)]).unwrap();
        if let ConstraintMap::EntryObservation { n1, pairs, .. } = p.constraints() {
            let (a, b) = pairs[0];
            assert!(a < *n1 && *n1 <= b);
            assert_eq!((a, b), (2, 4));
        } else {
            panic!("wrong variant");
        }
    }

    #[test]
    fn adjoint_check_single_edge() {
        let report = adjoint_consistency_check(&single_edge(), 16, 1);
        assert!(report.passed);
        assert!(report.max_adjoint_violation <= 1e-12);
    }

    #[test]
    fn adjoint_check_entry_observation() {
        let p = build_matrix_completion(1, 1, &[(0, 0, 3.0)]).unwrap();
        assert!(adjoint_consistency_check(&p, 16, 2).passed);
    }

    #[test]
    fn adjoint_check_detects_corrupted_matrix() {
        let n = 4;
        let a1 = SparseSymmetric::from_triplets(n, &[(0, 0, 1.0), (1, 2, 0.5)]).unwrap();
        let a2 = SparseSymmetric::from_triplets(n, &[(0, 3, 1.0), (2, 2, 2.0)]).unwrap();
        // break symmetry of A_2 in one triangle only
        let (row_ptr, col_idx, mut values) = a2.into_csr();
        let k = (row_ptr[0]..row_ptr[1]).find(|&k| col_idx[k] == 3).unwrap();
        values[k] += 1.0;
        let a2 = SparseSymmetric::from_csr_unchecked(n, row_ptr, col_idx, values);
        let p = SdpProblem::new(
            CostOracle::Identity { n },
            ConstraintMap::GenericSparse {
                n,
                mats: vec![a1, a2],
            },
            vec![1.0, 0.0],
            None,
        )
        .unwrap();
        let report = adjoint_consistency_check(&p, 16, 3);
        assert!(!report.passed);
        assert!(report.max_adjoint_violation > 1e-3);
    }

    #[test]
    fn slack_operator_is_cost_minus_adjoint() {
        let p = single_edge();
        let y = [-2.0, -2.0];
        let z = p.slack(&y);
        let mut out = vec![0.0; 2];
        z.apply(&[1.0, 0.0], &mut out);
        assert_eq!(out, vec![1.0, 1.0]);
        z.negated().apply(&[1.0, 0.0], &mut out);
        assert_eq!(out, vec![-1.0, -1.0]);
    }

    #[test]
    fn gram_of_structured_maps() {
        let p = single_edge();
        assert_eq!(p.constraints().gram_apply(&[2.0, 3.0]), vec![2.0, 3.0]);
        let q = build_matrix_completion(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        assert_eq!(q.constraints().gram_apply(&[2.0, 3.0]), vec![1.0, 1.5]);
    }

    #[test]
    fn problem_validation() {
        let n = 2;
        let bad_b = SdpProblem::new(
            CostOracle::Identity { n },
            ConstraintMap::DiagEquality { n },
            vec![1.0],
            None,
        );
        assert!(matches!(bad_b, Err(SdpError::Dimension(_))));
        let mismatch = SdpProblem::new(
            CostOracle::Identity { n: 3 },
            ConstraintMap::DiagEquality { n },
            vec![1.0, 1.0],
            None,
        );
        assert!(mismatch.is_err());
    }
}
