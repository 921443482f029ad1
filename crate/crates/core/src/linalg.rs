//! Small vector kernels and the symmetric-operator abstraction used by the
//! matrix-free solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

/// A symmetric linear map on `R^n`, applied matrix-free.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    /// `out <- A x`. `out` is overwritten.
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

/// Diagonal operator, mainly for tests and examples.
#[derive(Debug, Clone)]
pub struct DiagonalOperator(pub Vec<f64>);

impl SymmetricOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for ((o, d), xi) in out.iter_mut().zip(&self.0).zip(x) {
            *o = d * xi;
        }
    }
}

/// Dense symmetric operator backed by an `nalgebra` matrix.
#[derive(Debug, Clone)]
pub struct DenseOperator(pub DMatrix<f64>);

impl SymmetricOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.0.nrows();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += self.0[(i, j)] * xj;
            }
            *o = acc;
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four independent partial sums so the loop vectorizes
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y <- y + alpha x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Normalizes in place and returns the previous norm.
pub fn normalize(x: &mut [f64]) -> f64 {
    let nrm = norm2(x);
    if nrm > 0.0 {
        scale(1.0 / nrm, x);
    }
    nrm
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let mut v = gaussian_vector(rng, n);
        if normalize(&mut v) > 0.0 {
            return v;
        }
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
///
/// The input is symmetrized first. Columns of the returned matrix are the
/// matching unit eigenvectors.
pub fn sym_eigen_sorted(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = symmetrize(a);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Spectral norm of a symmetric matrix.
pub fn sym_op_norm(a: &DMatrix<f64>) -> f64 {
    let (vals, _) = sym_eigen_sorted(a);
    vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let (vals, _) = sym_eigen_sorted(a);
    vals.first().copied().unwrap_or(0.0)
}

/// Frobenius inner product `tr(A^T B)`.
pub fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn to_dvector(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

/// Dimension `r(r+1)/2` of the space of `r x r` symmetric matrices.
pub fn sym_dim(r: usize) -> usize {
    r * (r + 1) / 2
}

/// Coordinates of a symmetric matrix in the orthonormal basis
/// `{E_ii} u {(E_ij + E_ji)/sqrt2 : i < j}`, ordered column by column.
pub fn svec(s: &DMatrix<f64>) -> Vec<f64> {
    let r = s.nrows();
    let mut out = Vec::with_capacity(sym_dim(r));
    for j in 0..r {
        for i in 0..=j {
            if i == j {
                out.push(s[(i, i)]);
            } else {
                out.push(std::f64::consts::SQRT_2 * 0.5 * (s[(i, j)] + s[(j, i)]));
            }
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], r: usize) -> DMatrix<f64> {
    assert_eq!(v.len(), sym_dim(r));
    let mut s = DMatrix::zeros(r, r);
    let mut k = 0;
    for j in 0..r {
        for i in 0..=j {
            if i == j {
                s[(i, i)] = v[k];
            } else {
                let x = v[k] * std::f64::consts::FRAC_1_SQRT_2;
                s[(i, j)] = x;
                s[(j, i)] = x;
            }
            k += 1;
        }
    }
    s
}

/// The index pair `(i, j)`, `i <= j`, of the `k`-th [`svec`] coordinate.
pub fn svec_index(k: usize) -> (usize, usize) {
    let mut j = 0;
    let mut start = 0;
    while start + j < k {
        start += j + 1;
        j += 1;
    }
    (k - start, j)
}
