//! Small dense linear algebra helpers shared by the factorization and
//! diagnostics code.

use nalgebra::{DMatrix, DVector};

use crate::rng::rng_from_seed;
use rand::Rng;

/// Result of a truncated pseudoinverse.
pub struct Pinv {
    pub pinv: DMatrix<f64>,
    pub max_sv: f64,
    pub min_sv: f64,
    /// Smallest singular value kept by the truncation; `None` when everything
    /// was truncated away.
    pub min_retained: Option<f64>,
}

/// Pseudoinverse via full SVD, zeroing singular values strictly below
/// `cutoff`.
pub fn svd_pinv(a: &DMatrix<f64>, cutoff: f64) -> Pinv {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd u");
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let sv = &svd.singular_values;
    let max_sv = sv.iter().cloned().fold(0.0, f64::max);
    let min_sv = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut min_retained: Option<f64> = None;
    let mut inv = DVector::zeros(sv.len());
    for i in 0..sv.len() {
        if sv[i] >= cutoff && sv[i] > 0.0 {
            inv[i] = 1.0 / sv[i];
            min_retained = Some(match min_retained {
                Some(m) => m.min(sv[i]),
                None => sv[i],
            });
        }
    }
    // pinv = V * diag(inv) * U^T
    let mut v = vt.transpose();
    for c in 0..v.ncols() {
        let s = inv[c];
        for r in 0..v.nrows() {
            v[(r, c)] *= s;
        }
    }
    Pinv {
        pinv: v * u.transpose(),
        max_sv,
        min_sv: if min_sv.is_finite() { min_sv } else { 0.0 },
        min_retained,
    }
}

/// Conventional pseudoinverse cutoff: `max_dim * eps * sigma_max`.
pub fn default_cutoff(a: &DMatrix<f64>, max_sv: f64) -> f64 {
    a.nrows().max(a.ncols()) as f64 * f64::EPSILON * max_sv
}

/// Largest singular value of the operator `v -> op(v)` on R^n, by power
/// iteration on `op' . op` where `op'` is the adjoint. For a symmetric
/// operator pass the same closure twice. Deterministic (fixed seeded start).
pub fn spectral_norm_op<F, G>(n: usize, op: F, adjoint: G, tol: f64, max_iters: usize) -> f64
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    if n == 0 {
        return 0.0;
    }
    let mut rng = rng_from_seed(0x5eed_cafe);
    let mut v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    v /= norm;
    let mut last = 0.0f64;
    for _ in 0..max_iters {
        let w = adjoint(&op(&v));
        let wn = w.norm();
        if wn < 1e-300 {
            return 0.0;
        }
        let sigma = wn.sqrt(); // ||A'A v|| -> sigma^2 at convergence
        v = w / wn;
        if (sigma - last).abs() <= tol * sigma.max(1e-300) {
            return sigma;
        }
        last = sigma;
    }
    last
}

/// Spectral norm of a symmetric dense matrix by plain power iteration (one
/// matvec per step).
pub fn spectral_norm_sym(a: &DMatrix<f64>, tol: f64, max_iters: usize) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut rng = rng_from_seed(0x5eed_cafe);
    let mut v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    v /= v.norm();
    let mut last = 0.0f64;
    for _ in 0..max_iters {
        let w = a * &v;
        let wn = w.norm();
        if wn < 1e-300 {
            return 0.0;
        }
        v = w / wn;
        if (wn - last).abs() <= tol * wn.max(1e-300) {
            return wn;
        }
        last = wn;
    }
    last
}
