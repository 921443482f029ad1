//! Power-iteration estimates of operator norms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::problem::SdpProblem;

/// Largest eigenvalue estimate of a PSD operator `G` on `R^dim` by power
/// iteration. Returns the running maximum of the Rayleigh quotients, which
/// is a lower bound on `lambda_max(G)` and nondecreasing in `iters`.
pub fn power_lambda_max<F>(dim: usize, iters: usize, seed: u64, mut apply: F) -> f64
where
    F: FnMut(&[f64], &mut [f64]),
{
    if dim == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = linalg::random_unit_vector(&mut rng, dim);
    let mut gx = vec![0.0; dim];
    let mut best = 0.0_f64;
    for _ in 0..iters.max(1) {
        apply(&x, &mut gx);
        let rq = linalg::dot(&x, &gx);
        if rq.is_finite() {
            best = best.max(rq);
        }
        std::mem::swap(&mut x, &mut gx);
        if linalg::normalize(&mut x) == 0.0 {
            break;
        }
    }
    best
}

/// Lower-bound estimate of `sigma_max(A)` from power iteration on `A A^T`.
pub fn operator_norm_amap(problem: &SdpProblem, iters: usize, seed: u64) -> f64 {
    let map = problem.constraints();
    power_lambda_max(problem.m(), iters, seed, |y, out| {
        out.copy_from_slice(&map.gram_apply(y));
    })
    .sqrt()
}
