//! Seeded instance generators: random graphs, synthetic matrix completion,
//! planted SDPs with a known primal-dual pair, and small degenerate examples.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::io::Observations;
use crate::linalg;
use crate::problem::{
    build_matrix_completion, ConstraintMap, CostOracle, SdpProblem, SparseSymmetric, WeightedGraph,
};

/// Erdos-Renyi graph `G(n, p)` with unit weights.
pub fn random_graph(n: usize, p: f64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    WeightedGraph { n, edges }
}

/// Random graph with about `degree` neighbours per vertex, generated in
/// `O(n * degree)` time. Duplicate draws are summed by the builder.
pub fn random_sparse_graph(n: usize, degree: usize, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n * degree / 2);
    for i in 0..n {
        for _ in 0..degree.div_ceil(2) {
            let mut j = rng.random_range(0..n);
            while j == i {
                j = rng.random_range(0..n);
            }
            edges.push((i, j, 1.0));
        }
    }
    WeightedGraph { n, edges }
}

/// Synthetic matrix completion data.
#[derive(Debug, Clone)]
pub struct SyntheticCompletion {
    pub observations: Observations,
    /// Nuclear norm of the ground-truth matrix.
    pub truth_nuclear_norm: f64,
}

impl SyntheticCompletion {
    /// The lifted problem with trace hint `2 ||M||_*`, the trace of the
    /// lifted ground truth.
    pub fn problem(&self) -> Result<SdpProblem> {
        let o = &self.observations;
        Ok(build_matrix_completion(o.n1, o.n2, &o.entries)?.with_trace_hint(Some(2.0 * self.truth_nuclear_norm)))
    }
}

/// Rank-5 ground truth `M = U V` with random sign factors, `n1 = 75c`,
/// `n2 = 50c`, and `min(25 (n1 + n2) ln(n1 + n2), n1 n2)` entries observed
/// uniformly without replacement.
pub fn synthetic_matrix_completion(c: usize, seed: u64) -> SyntheticCompletion {
    let n1 = 75 * c.max(1);
    let n2 = 50 * c.max(1);
    low_rank_completion(n1, n2, 5, None, seed)
}

/// Sign-factor ground truth of the given rank with `count` observed entries
/// (default `min(25 (n1 + n2) ln(n1 + n2), n1 n2)`).
pub fn low_rank_completion(
    n1: usize,
    n2: usize,
    rank: usize,
    count: Option<usize>,
    seed: u64,
) -> SyntheticCompletion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sign = |rng: &mut ChaCha8Rng| if rng.random::<bool>() { 1.0 } else { -1.0 };
    let u = DMatrix::from_fn(n1, rank, |_, _| sign(&mut rng));
    let v = DMatrix::from_fn(rank, n2, |_, _| sign(&mut rng));
    let total = n1 * n2;
    let want = count.unwrap_or_else(|| {
        let n = (n1 + n2) as f64;
        (25.0 * n * n.ln()).round() as usize
    });
    let k = want.clamp(1, total);
    let mut picks = sample(&mut rng, total, k).into_vec();
    picks.sort_unstable();
    let entries = picks
        .into_iter()
        .map(|idx| {
            let (i, j) = (idx / n2, idx % n2);
            let val: f64 = (0..rank).map(|t| u[(i, t)] * v[(t, j)]).sum();
            (i, j, val)
        })
        .collect();
    let m = &u * &v;
    let nuclear = m.singular_values().sum();
    SyntheticCompletion {
        observations: Observations { n1, n2, entries },
        truth_nuclear_norm: nuclear,
    }
}

/// An SDP with a planted, strictly complementary primal-dual pair.
#[derive(Debug, Clone)]
pub struct Planted {
    pub problem: SdpProblem,
    pub x_star: DMatrix<f64>,
    pub y_star: Vec<f64>,
    pub p_star: f64,
}

fn orthonormal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_vec(n, n, linalg::gaussian_vector(rng, n * n));
    g.qr().q()
}

fn dense_to_sparse(a: &DMatrix<f64>) -> SparseSymmetric {
    let n = a.nrows();
    let mut trip = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in 0..=j {
            let v = if i == j { a[(i, i)] } else { 0.5 * (a[(i, j)] + a[(j, i)]) };
            if v != 0.0 {
                trip.push((i, j, v));
            }
        }
    }
    SparseSymmetric::from_triplets(n, &trip).expect("indices are in range")
}

/// Generic-sparse SDP with `X* = U D U^T` of rank `r`, `Z(y*) = W E W^T` of
/// rank `n - r`, Gaussian `A_i` and Gaussian `y*`. Eigenvalues of `D` and `E`
/// are drawn from `[1, 2]`. The pair is unique for generic data when
/// `r(r+1)/2 <= m <= r(r+1)/2 + r(n-r)`.
pub fn planted_sdp(n: usize, r: usize, m: usize, seed: u64) -> Result<Planted> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = orthonormal(n, &mut rng);
    let mut x_star = DMatrix::zeros(n, n);
    let mut z_star = DMatrix::zeros(n, n);
    for k in 0..n {
        let col = q.column(k);
        let w = rng.random_range(1.0..2.0);
        if k < r {
            x_star += w * col * col.transpose();
        } else {
            z_star += w * col * col.transpose();
        }
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut mats = Vec::with_capacity(m);
    let mut dense = Vec::with_capacity(m);
    for _ in 0..m {
        let g = DMatrix::from_vec(n, n, linalg::gaussian_vector(&mut rng, n * n)) * scale;
        let a = linalg::symmetrize(&g);
        mats.push(dense_to_sparse(&a));
        dense.push(a);
    }
    let y_star = linalg::gaussian_vector(&mut rng, m);
    let mut c = z_star.clone();
    for (yi, a) in y_star.iter().zip(&dense) {
        c += *yi * a;
    }
    let b: Vec<f64> = dense.iter().map(|a| linalg::frob_inner(a, &x_star)).collect();
    let p_star = linalg::frob_inner(&c, &x_star);
    let x_star = linalg::symmetrize(&x_star);
    let problem = SdpProblem::new(
        CostOracle::SparseSymmetric(dense_to_sparse(&c)),
        ConstraintMap::GenericSparse { n, mats },
        b,
        Some(x_star.trace()),
    )?;
    Ok(Planted {
        problem,
        x_star,
        y_star,
        p_star,
    })
}

/// `min tr(X)` subject to `tr(X) = 1`: every unit-trace PSD matrix is
/// optimal, `y* = 1`.
pub fn trace_normalization(n: usize) -> SdpProblem {
    let id = SparseSymmetric::from_triplets(n, &(0..n).map(|i| (i, i, 1.0)).collect::<Vec<_>>())
        .expect("diagonal indices are in range");
    SdpProblem::new(
        CostOracle::Identity { n },
        ConstraintMap::GenericSparse { n, mats: vec![id] },
        vec![1.0],
        Some(1.0),
    )
    .expect("well-formed")
}

/// A 3 x 3 instance whose unique solutions `X* = e1 e1^T`, `y* = 0`,
/// `Z(y*) = e3 e3^T` leave `e2` in both kernels, so
/// `rank X* + rank Z(y*) = 2 < 3`.
///
/// `min X33` s.t. `X11 = 1`, `2 X12 = 0`, `X22 + 2 X13 = 0`.
pub fn degenerate_instance() -> SdpProblem {
    let n = 3;
    let c = SparseSymmetric::from_triplets(n, &[(2, 2, 1.0)]).expect("in range");
    let a1 = SparseSymmetric::from_triplets(n, &[(0, 0, 1.0)]).expect("in range");
    let a2 = SparseSymmetric::from_triplets(n, &[(0, 1, 1.0)]).expect("in range");
    let a3 = SparseSymmetric::from_triplets(n, &[(1, 1, 1.0), (0, 2, 1.0)]).expect("in range");
    SdpProblem::new(
        CostOracle::SparseSymmetric(c),
        ConstraintMap::GenericSparse {
            n,
            mats: vec![a1, a2, a3],
        },
        vec![1.0, 0.0, 0.0],
        None,
    )
    .expect("well-formed")
}
