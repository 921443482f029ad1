//! Euclidean projections onto the PSD cone and onto a norm ball.

use nalgebra::DMatrix;

use crate::error::{Result, SdpError};
use crate::linalg;

/// Frobenius-nearest PSD matrix: symmetrize, clamp negative eigenvalues to 0.
pub fn project_psd(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if s.nrows() != s.ncols() {
        return Err(SdpError::Dimension(format!("{} x {} is not square", s.nrows(), s.ncols())));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(SdpError::NonFinite("PSD projection input"));
    }
    let (vals, vecs) = linalg::sym_eigen_sorted(s);
    let r = s.nrows();
    let mut out = DMatrix::zeros(r, r);
    for (k, &lam) in vals.iter().enumerate() {
        if lam > 0.0 {
            let u = vecs.column(k);
            out += lam * u * u.transpose();
        }
    }
    Ok(linalg::symmetrize(&out))
}

/// Projection onto `{x : ||x||_2 <= delta}`.
pub fn project_ball(v: &[f64], delta: f64) -> Vec<f64> {
    assert!(delta >= 0.0, "ball radius must be nonnegative");
    let nrm = linalg::norm2(v);
    if nrm <= delta {
        v.to_vec()
    } else {
        v.iter().map(|x| x * delta / nrm).collect()
    }
}
