//! Direct evaluation of the marking-error quantities, fill distance, and the
//! max-norm error bound they imply for the Nyström approximation.

use crate::anchornet::LandmarkSet;
use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{gram_points, Kernel};
use crate::linalg::{default_cutoff, svd_pinv};
use crate::nystrom::{self, ErrorNorm, Stabilization};
use crate::rng::rng_from_seed;
use rand::Rng;

/// Largest n for which the O(n²)-flavored marking-error scan is permitted.
pub const MARKING_GUARD: usize = 5000;
/// Largest n for which `verify_bound` will form the dense reconstruction.
pub const VERIFY_GUARD: usize = 500;

/// Bivariate (e_r) and univariate (e_hat_r) marking errors, plus the
/// max-norm error bound they certify:
/// `bound = e_r + 2·e_hat_r + pinv_norm·e_hat_r²`.
#[derive(Debug, Clone, Copy)]
pub struct MarkingErrors {
    pub e_r: f64,
    pub e_hat_r: f64,
    pub pinv_norm: f64,
    pub bound: f64,
}

/// Fill-distance geometry of a landmark set.
#[derive(Debug, Clone, Copy)]
pub struct GeometryErrors {
    /// δ = max over dataset points of the Euclidean distance to the nearest
    /// landmark; zero iff the landmarks cover the dataset.
    pub delta: f64,
}

/// Max-norm error bound for an L-Lipschitz kernel with fill distance δ and
/// r landmarks: `√2·L·δ + 2·√r·L·δ + pinv_norm·r·L²·δ²`.
pub fn lipschitz_bound(delta: f64, l: f64, r: usize, pinv_norm: f64) -> f64 {
    let r = r as f64;
    2.0f64.sqrt() * l * delta + 2.0 * r.sqrt() * l * delta + pinv_norm * r * l * l * delta * delta
}

fn landmark_rows(ds: &Dataset, lm: &LandmarkSet) -> Result<Vec<usize>> {
    if lm.indices.is_empty() {
        return Err(Error::CentroidLandmarks);
    }
    if lm.indices.len() != lm.m_actual() {
        return Err(Error::CentroidLandmarks);
    }
    for &i in &lm.indices {
        if i >= ds.n() {
            return Err(Error::IndexOutOfRange { index: i, len: ds.n() });
        }
    }
    Ok(lm.indices.clone())
}

/// Marking errors via sorted nearest-value search (E_r) and direct row
/// distances (Ê_r). Requires dataset-row landmarks.
pub fn marking_errors<K: Kernel>(
    ds: &Dataset,
    lm: &LandmarkSet,
    kernel: &K,
) -> Result<MarkingErrors> {
    let n = ds.n();
    if n > MARKING_GUARD {
        return Err(Error::OverGuard {
            n,
            guard: MARKING_GUARD,
        });
    }
    let _ = landmark_rows(ds, lm)?;
    let r = lm.m_actual();

    // K_XS once; its landmark rows are K_uS.
    let k_xs = gram_points(kernel, &ds.points, &lm.coords);
    let k_ss = gram_points(kernel, &lm.coords, &lm.coords);

    // E_r: for every value kappa(x, y), distance to the nearest kappa(u, v),
    // found by binary search in the sorted r² landmark values.
    let mut vals: Vec<f64> = k_ss.iter().cloned().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rows: Vec<Vec<f64>> = (0..n).map(|i| ds.row(i)).collect();
    let mut e_r = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let t = kernel.eval(&rows[i], &rows[j]);
            e_r = e_r.max(nearest_gap(&vals, t));
        }
    }

    // Ê_r: max over x of min over u of || K_xS - K_uS ||_2.
    let mut e_hat_r = 0.0f64;
    for i in 0..n {
        let mut best = f64::INFINITY;
        for (u, &su) in lm.indices.iter().enumerate() {
            let _ = u;
            let mut d2 = 0.0;
            for c in 0..r {
                let diff = k_xs[(i, c)] - k_xs[(su, c)];
                d2 += diff * diff;
            }
            best = best.min(d2);
        }
        e_hat_r = e_hat_r.max(best.sqrt());
    }

    let svd = svd_pinv(&k_ss, {
        let sv = k_ss.clone().singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        default_cutoff(&k_ss, smax)
    });
    let pinv_norm = svd.min_retained.map_or(0.0, |s| 1.0 / s);
    Ok(MarkingErrors {
        e_r,
        e_hat_r,
        pinv_norm,
        bound: e_r + 2.0 * e_hat_r + pinv_norm * e_hat_r * e_hat_r,
    })
}

fn nearest_gap(sorted: &[f64], t: f64) -> f64 {
    let p = sorted.partition_point(|&v| v < t);
    let mut best = f64::INFINITY;
    if p < sorted.len() {
        best = best.min((sorted[p] - t).abs());
    }
    if p > 0 {
        best = best.min((t - sorted[p - 1]).abs());
    }
    best
}

/// Exhaustive O(n²r²) reference implementation of the marking errors; kept
/// as the oracle the optimized scan is tested against.
pub fn marking_errors_naive<K: Kernel>(
    ds: &Dataset,
    lm: &LandmarkSet,
    kernel: &K,
) -> Result<(f64, f64)> {
    let _ = landmark_rows(ds, lm)?;
    let n = ds.n();
    let r = lm.m_actual();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| ds.row(i)).collect();
    let srows: Vec<Vec<f64>> = (0..r).map(|u| lm.coords.row(u).iter().cloned().collect()).collect();
    let mut e_r = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let t = kernel.eval(&rows[i], &rows[j]);
            let mut best = f64::INFINITY;
            for u in 0..r {
                for v in 0..r {
                    best = best.min((t - kernel.eval(&srows[u], &srows[v])).abs());
                }
            }
            e_r = e_r.max(best);
        }
    }
    let mut e_hat_r = 0.0f64;
    for i in 0..n {
        let mut best = f64::INFINITY;
        for u in 0..r {
            let mut d2 = 0.0;
            for v in 0..r {
                let diff = kernel.eval(&rows[i], &srows[v]) - kernel.eval(&srows[u], &srows[v]);
                d2 += diff * diff;
            }
            best = best.min(d2);
        }
        e_hat_r = e_hat_r.max(best.sqrt());
    }
    Ok((e_r, e_hat_r))
}

/// Fill distance δ of the landmark set (centroid landmarks allowed).
pub fn fill_distance(ds: &Dataset, lm: &LandmarkSet) -> Result<GeometryErrors> {
    let r = lm.m_actual();
    if r == 0 {
        return Err(Error::EmptyInput("landmark set"));
    }
    let d = ds.d();
    let mut delta = 0.0f64;
    let mut x = vec![0.0; d];
    for i in 0..ds.n() {
        for c in 0..d {
            x[c] = ds.points[(i, c)];
        }
        let mut best = f64::INFINITY;
        for u in 0..r {
            let mut d2 = 0.0;
            for c in 0..d {
                let diff = x[c] - lm.coords[(u, c)];
                d2 += diff * diff;
            }
            best = best.min(d2);
        }
        delta = delta.max(best);
    }
    Ok(GeometryErrors {
        delta: delta.sqrt(),
    })
}

/// Sampled estimate of a Lipschitz constant for the bivariate kernel seen as
/// a function of the stacked argument (x, y). Difference quotients over
/// random dataset pairs and small perturbations, inflated by 2×. An
/// estimate, not a bound.
pub fn estimate_lipschitz<K: Kernel>(ds: &Dataset, kernel: &K, samples: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let n = ds.n();
    let d = ds.d();
    let mut best = 0.0f64;
    for _ in 0..samples {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (xi, yj) = (ds.row(i), ds.row(j));
        let (xu, yv) = (ds.row(u), ds.row(v));
        let mut dist2 = 0.0;
        for c in 0..d {
            dist2 += (xi[c] - xu[c]).powi(2) + (yj[c] - yv[c]).powi(2);
        }
        if dist2 > 1e-24 {
            let q = (kernel.eval(&xi, &yj) - kernel.eval(&xu, &yv)).abs() / dist2.sqrt();
            best = best.max(q);
        }
        // local quotient: perturb one pair slightly
        let h = 1e-4;
        let mut xp = xi.clone();
        let c = rng.gen_range(0..d);
        xp[c] += h;
        let q = (kernel.eval(&xp, &yj) - kernel.eval(&xi, &yj)).abs() / h;
        best = best.max(q);
    }
    2.0 * best
}

/// Evaluate both sides of the max-norm error bound on a dense instance.
/// Returns (max-norm error, bound, holds).
pub fn verify_bound<K: Kernel>(
    ds: &Dataset,
    lm: &LandmarkSet,
    kernel: &K,
) -> Result<(f64, f64, bool)> {
    if ds.n() > VERIFY_GUARD {
        return Err(Error::OverGuard {
            n: ds.n(),
            guard: VERIFY_GUARD,
        });
    }
    let _ = landmark_rows(ds, lm)?;
    let f = nystrom::factor(ds, lm, kernel, Stabilization::None, 0.0)?;
    let rep = nystrom::approx_error(ds, &f, kernel, ErrorNorm::Max, None, 0.0)?;
    let me = marking_errors(ds, lm, kernel)?;
    let holds = rep.value <= me.bound * (1.0 + 1e-8) + 1e-12;
    Ok((rep.value, me.bound, holds))
}
