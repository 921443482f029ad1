//! Thick-restart Lanczos with full reorthogonalization.
//!
//! The projected matrix `H = Q^T A Q` is assembled column by column from the
//! full inner products of each new `A q_j` with the basis, so the relation
//! `A Q = Q H + f e_k^T` holds after a thick restart without any arrowhead
//! bookkeeping. Ritz residuals are `||f|| |y_k|`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, SdpError};
use crate::linalg::{self, SymmetricOperator};

/// Eigenvalues closer than this are treated as a cluster.
pub const CLUSTER_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct EigensolverConfig {
    /// Relative residual tolerance: `||A v - theta v|| <= tol * max(1, |theta|)`.
    pub tol: f64,
    /// Krylov dimension cap. `None` picks `min(n, max(4r + 20, 100))`.
    pub max_lanczos_dim: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for EigensolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_lanczos_dim: None,
            restarts: 50,
            seed: 0x5eed,
        }
    }
}

impl EigensolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// The Krylov dimension used for an `n`-dimensional operator and `r`
    /// wanted pairs.
    pub fn krylov_dim(&self, n: usize, r: usize) -> usize {
        let k = self
            .max_lanczos_dim
            .unwrap_or_else(|| (4 * r + 20).max(100));
        k.max(r + 2).min(n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(SdpError::InvalidInput(format!("eigensolver tol {} must be > 0", self.tol)));
        }
        Ok(())
    }
}

/// Largest eigenpairs of a symmetric operator.
#[derive(Debug, Clone)]
pub(crate) struct RitzPairs {
    /// Descending.
    pub values: Vec<f64>,
    /// `n x k`, columns match `values`.
    pub vectors: DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub converged: bool,
}

struct Negated<'a, O: SymmetricOperator + ?Sized>(&'a O);

impl<O: SymmetricOperator + ?Sized> SymmetricOperator for Negated<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.0.apply(x, out);
        linalg::scale(-1.0, out);
    }
}

/// Column-major `n x cap` basis with `len` active columns.
struct Basis {
    n: usize,
    len: usize,
    data: Vec<f64>,
}

impl Basis {
    fn new(n: usize, cap: usize) -> Self {
        Self {
            n,
            len: 0,
            data: vec![0.0; n * cap],
        }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    /// Removes the components of `w` along the active columns; returns the
    /// coefficients that were removed.
    fn orthogonalize(&self, w: &mut [f64]) -> Vec<f64> {
        let mut coeffs = vec![0.0; self.len];
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c = linalg::dot(self.col(j), w);
        }
        for (j, c) in coeffs.iter().enumerate() {
            linalg::axpy(-c, self.col(j), w);
        }
        coeffs
    }

    fn push(&mut self, v: &[f64]) {
        let j = self.len;
        self.col_mut(j).copy_from_slice(v);
        self.len += 1;
    }

    /// `Q y` for a coefficient vector of length `len`.
    fn combine(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, c) in y.iter().enumerate() {
            linalg::axpy(*c, self.col(j), out);
        }
    }
}

fn random_orthogonal(basis: &Basis, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v = linalg::gaussian_vector(rng, basis.n);
        basis.orthogonalize(&mut v);
        basis.orthogonalize(&mut v);
        if linalg::normalize(&mut v) > 1e-8 {
            return Some(v);
        }
    }
    None
}

/// Computes the `nev` largest eigenpairs of `op`.
pub(crate) fn largest_eigenpairs<O: SymmetricOperator + ?Sized>(
    op: &O,
    nev: usize,
    cfg: &EigensolverConfig,
    start: Option<&[f64]>,
) -> Result<RitzPairs> {
    cfg.validate()?;
    let n = op.dim();
    if nev == 0 || nev > n {
        return Err(SdpError::InvalidInput(format!(
            "requested {nev} eigenpairs of an operator of dimension {n}"
        )));
    }
    let kmax = cfg.krylov_dim(n, nev).max(nev.min(n));
    let keep_target = (nev + (kmax - nev) / 2).max(nev).min(kmax.saturating_sub(1));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut basis = Basis::new(n, kmax);
    let mut h = DMatrix::<f64>::zeros(kmax, kmax);
    let mut w = vec![0.0; n];

    let mut q0 = match start {
        Some(s) if s.len() == n && linalg::norm2(s) > 0.0 => s.to_vec(),
        _ => linalg::gaussian_vector(&mut rng, n),
    };
    if linalg::normalize(&mut q0) == 0.0 || q0.iter().any(|x| !x.is_finite()) {
        q0 = linalg::random_unit_vector(&mut rng, n);
    }
    basis.push(&q0);

    let mut cycle = 0usize;
    loop {
        // Extend the basis to kmax columns.
        let mut f_norm = 0.0;
        let mut f = vec![0.0; n];
        let mut j = basis.len - 1;
        loop {
            op.apply(basis.col(j), &mut w);
            if w.iter().any(|x| !x.is_finite()) {
                return Err(SdpError::NonFinite("operator application"));
            }
            let before = linalg::norm2(&w);
            let mut coeffs = basis.orthogonalize(&mut w);
            let second = basis.orthogonalize(&mut w);
            for (c, s) in coeffs.iter_mut().zip(&second) {
                *c += s;
            }
            for (i, c) in coeffs.iter().enumerate() {
                h[(i, j)] = *c;
                h[(j, i)] = *c;
            }
            let beta = linalg::norm2(&w);
            if j + 1 == kmax {
                f.copy_from_slice(&w);
                f_norm = beta;
                break;
            }
            let next = if beta > 1e-12 * before.max(f64::MIN_POSITIVE) && beta > 0.0 {
                linalg::scale(1.0 / beta, &mut w);
                Some(w.clone())
            } else {
                random_orthogonal(&basis, &mut rng)
            };
            match next {
                Some(q) => {
                    basis.push(&q);
                    j += 1;
                }
                None => {
                    // The basis already spans the whole space.
                    break;
                }
            }
        }

        let k = basis.len;
        let hk = linalg::symmetrize(&h.view((0, 0), (k, k)).into_owned());
        let eig = SymmetricEigen::new(hk);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let want = nev.min(k);
        let res: Vec<f64> = order
            .iter()
            .map(|&i| f_norm * eig.eigenvectors[(k - 1, i)].abs())
            .collect();
        let converged = (0..want).all(|p| {
            let theta = eig.eigenvalues[order[p]];
            res[p] <= cfg.tol * theta.abs().max(1.0)
        });

        if converged || cycle >= cfg.restarts || k < kmax {
            let mut vectors = DMatrix::zeros(n, want);
            let mut tmp = vec![0.0; n];
            for (p, &i) in order.iter().take(want).enumerate() {
                let y: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
                basis.combine(&y, &mut tmp);
                linalg::normalize(&mut tmp);
                vectors.set_column(p, &nalgebra::DVector::from_column_slice(&tmp));
            }
            // Residuals recomputed explicitly for the returned vectors.
            let mut residuals = Vec::with_capacity(want);
            let mut values = Vec::with_capacity(want);
            for (p, &i) in order.iter().take(want).enumerate() {
                let theta = eig.eigenvalues[i];
                let v: Vec<f64> = vectors.column(p).iter().copied().collect();
                op.apply(&v, &mut w);
                    linalg::axpy(-theta, &v, &mut w);
                residuals.push(linalg::norm2(&w));
                values.push(theta);
            }
            let converged = values
                .iter()
                .zip(&residuals)
                .all(|(t, r)| *r <= cfg.tol * t.abs().max(1.0));
            return Ok(RitzPairs {
                values,
                vectors,
                residuals,
                converged,
            });
        }

        // Thick restart: keep the leading Ritz vectors, continue from f.
        let keep = keep_target.max(want);
        let mut kept = vec![0.0; n * keep];
        for (p, &i) in order.iter().take(keep).enumerate() {
            let y: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            basis.combine(&y, &mut kept[p * n..(p + 1) * n]);
        }
        basis.len = 0;
        h.fill(0.0);
        for p in 0..keep {
            let mut u = kept[p * n..(p + 1) * n].to_vec();
            basis.orthogonalize(&mut u);
            linalg::normalize(&mut u);
            basis.push(&u);
        }
        drop(kept);
        for (p, &i) in order.iter().take(keep).enumerate() {
            h[(p, p)] = eig.eigenvalues[i];
        }
        basis.orthogonalize(&mut f);
        basis.orthogonalize(&mut f);
        let next = if linalg::normalize(&mut f) > 0.0 {
            Some(f)
        } else {
            random_orthogonal(&basis, &mut rng)
        };
        match next {
            Some(q) => basis.push(&q),
            None => {
                cycle = cfg.restarts;
                continue;
            }
        }
        // the new column's H entries are filled by the next sweep
        cycle += 1;
    }
}

/// Smallest eigenpair of a symmetric operator.
#[derive(Debug, Clone, Serialize)]
pub struct MinEigpair {
    pub lambda: f64,
    pub v: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
}

/// `(lambda_min, v)` of `op`, optionally warm-started from `start`.
pub fn min_eigpair<O: SymmetricOperator + ?Sized>(
    op: &O,
    cfg: &EigensolverConfig,
    start: Option<&[f64]>,
) -> Result<MinEigpair> {
    let neg = Negated(op);
    let pairs = largest_eigenpairs(&neg, 1, cfg, start)?;
    Ok(MinEigpair {
        lambda: -pairs.values[0],
        v: pairs.vectors.column(0).iter().copied().collect(),
        residual: pairs.residuals[0],
        converged: pairs.converged,
    })
}

/// Orthonormal basis of the invariant subspace of the `r` smallest
/// eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigenbasis {
    /// `n x r`, orthonormal columns.
    pub v: DMatrix<f64>,
    /// Ascending.
    pub ritz_values: Vec<f64>,
    pub residual_norms: Vec<f64>,
    /// `(r+1)`-th smallest Ritz value, an estimate of `lambda_{n-r}`.
    pub threshold: Option<f64>,
    pub clustered: bool,
    pub converged: bool,
}

impl Eigenbasis {
    pub fn rank(&self) -> usize {
        self.v.ncols()
    }

    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    /// `||V^T V - I||_F`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.v.transpose() * &self.v;
        (g - DMatrix::identity(self.rank(), self.rank())).norm()
    }

    /// Builds a basis from explicit columns, orthonormalizing them first.
    pub fn from_columns(v: DMatrix<f64>) -> Self {
        let r = v.ncols();
        let q = v.qr().q();
        Self {
            v: q,
            ritz_values: vec![f64::NAN; r],
            residual_norms: vec![f64::NAN; r],
            threshold: None,
            clustered: false,
            converged: true,
        }
    }
}

/// The `r` smallest eigenpairs of `op` and the threshold `lambda_{n-r}`.
pub fn smallest_subspace<O: SymmetricOperator + ?Sized>(
    op: &O,
    r: usize,
    cfg: &EigensolverConfig,
    start: Option<&[f64]>,
) -> Result<Eigenbasis> {
    let n = op.dim();
    if r == 0 || r >= n {
        return Err(SdpError::InvalidInput(format!("rank r = {r} must satisfy 1 <= r < n = {n}")));
    }
    let neg = Negated(op);
    let pairs = largest_eigenpairs(&neg, r + 1, cfg, start)?;
    let values: Vec<f64> = pairs.values.iter().map(|v| -v).collect();
    let v = pairs.vectors.columns(0, r).into_owned();
    let threshold = values.get(r).copied();
    let clustered = threshold
        .map(|t| (t - values[r - 1]).abs() <= CLUSTER_GAP * values[r - 1].abs().max(1.0))
        .unwrap_or(false);
    Ok(Eigenbasis {
        v,
        ritz_values: values[..r].to_vec(),
        residual_norms: pairs.residuals[..r].to_vec(),
        threshold,
        clustered,
        converged: pairs.converged,
    })
}
