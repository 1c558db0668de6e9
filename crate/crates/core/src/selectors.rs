//! Baseline landmark selectors: uniform sampling, k-means centroids,
//! farthest point sampling, and exact ridge-leverage-score sampling.

use nalgebra::DMatrix;
use rand::Rng;
use std::time::Instant;

use crate::anchornet::LandmarkSet;
use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{gram, KernelSpec};
use crate::rng::{rng_from_seed, sample_without_replacement};

/// Dense-solve guard for exact ridge leverage scores.
pub const RLS_DENSE_GUARD: usize = 5000;

#[derive(Debug, Clone, Copy)]
pub struct SelectorConfig {
    pub seed: u64,
    /// Lloyd iteration count for k-means.
    pub kmeans_iters: usize,
    /// Ridge parameter for leverage-score sampling.
    pub rls_gamma: f64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig {
            seed: 0,
            kmeans_iters: 5,
            rls_gamma: 1.0,
        }
    }
}

/// `m` distinct indices drawn uniformly without replacement.
pub fn uniform(ds: &Dataset, m: usize, seed: u64) -> Result<LandmarkSet> {
    if m > ds.n() {
        return Err(Error::CountExceedsData {
            requested: m,
            available: ds.n(),
        });
    }
    let start = Instant::now();
    let mut rng = rng_from_seed(seed);
    let indices = sample_without_replacement(&mut rng, ds.n(), m);
    Ok(LandmarkSet::from_indices(ds, indices, "uniform", m, start.elapsed()))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm from a seeded uniform initialization. Landmarks are the
/// centroids, so `indices` is empty. Empty clusters are re-seeded to the point
/// farthest from every current centroid.
pub fn kmeans(ds: &Dataset, k: usize, iters: usize, seed: u64) -> Result<LandmarkSet> {
    if k > ds.n() {
        return Err(Error::CountExceedsData {
            requested: k,
            available: ds.n(),
        });
    }
    let start = Instant::now();
    let n = ds.n();
    let d = ds.d();
    let mut rng = rng_from_seed(seed);
    let init = sample_without_replacement(&mut rng, n, k);
    let mut centroids = DMatrix::from_fn(k, d, |i, j| ds.points[(init[i], j)]);

    let mut point = vec![0.0; d];
    for _ in 0..iters {
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            for j in 0..d {
                point[j] = ds.points[(i, j)];
            }
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let cd = sq_dist(&point, centroids.row(c).transpose().as_slice());
                if cd < best_d {
                    best_d = cd;
                    best = c;
                }
            }
            counts[best] += 1;
            for j in 0..d {
                sums[best][j] += point[j];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    centroids[(c, j)] = sums[c][j] / counts[c] as f64;
                }
            } else {
                // re-seed to the point farthest from all current centroids
                let mut far_i = 0usize;
                let mut far_d = -1.0;
                for i in 0..n {
                    for j in 0..d {
                        point[j] = ds.points[(i, j)];
                    }
                    let min_d = (0..k)
                        .map(|cc| sq_dist(&point, centroids.row(cc).transpose().as_slice()))
                        .fold(f64::INFINITY, f64::min);
                    if min_d > far_d {
                        far_d = min_d;
                        far_i = i;
                    }
                }
                for j in 0..d {
                    centroids[(c, j)] = ds.points[(far_i, j)];
                }
            }
        }
    }
    Ok(LandmarkSet {
        indices: Vec::new(),
        coords: centroids,
        method: "kmeans".into(),
        m_requested: k,
        select_time: start.elapsed(),
    })
}

/// Greedy farthest point sampling with a running minimum distance (O(mn));
/// the first point is drawn uniformly at random.
pub fn fps(ds: &Dataset, m: usize, seed: u64) -> Result<LandmarkSet> {
    if m > ds.n() {
        return Err(Error::CountExceedsData {
            requested: m,
            available: ds.n(),
        });
    }
    let start = Instant::now();
    let n = ds.n();
    let d = ds.d();
    let mut rng = rng_from_seed(seed);
    let first = rng.gen_range(0..n);
    let mut indices = vec![first];
    let mut selected = vec![false; n];
    selected[first] = true;
    let mut min_dist = vec![f64::INFINITY; n];
    let mut point = vec![0.0; d];
    let mut last = first;
    while indices.len() < m {
        for j in 0..d {
            point[j] = ds.points[(last, j)];
        }
        for i in 0..n {
            let row = ds.row(i);
            let dd = sq_dist(&row, &point);
            if dd < min_dist[i] {
                min_dist[i] = dd;
            }
        }
        let mut far_i = usize::MAX;
        let mut far_d = -1.0;
        for i in 0..n {
            if !selected[i] && min_dist[i] > far_d {
                far_d = min_dist[i];
                far_i = i;
            }
        }
        selected[far_i] = true;
        indices.push(far_i);
        last = far_i;
    }
    Ok(LandmarkSet::from_indices(ds, indices, "fps", m, start.elapsed()))
}

/// Exact ridge leverage scores `l_i = (K (K + gamma I)^{-1})_{ii}` for an SPSD
/// kernel, computed by a dense symmetric eigendecomposition. Only the Gaussian
/// family is accepted; indefinite kernels have no nonnegative score guarantee.
pub fn rls_scores(ds: &Dataset, spec: &KernelSpec, gamma: f64) -> Result<Vec<f64>> {
    if !spec.family.is_spsd() {
        return Err(Error::IndefiniteKernel {
            method: "ridge leverage scores",
            family: spec.family.to_string(),
        });
    }
    assert!(gamma > 0.0);
    let n = ds.n();
    if n > RLS_DENSE_GUARD {
        return Err(Error::OverGuard {
            n,
            guard: RLS_DENSE_GUARD,
        });
    }
    let all: Vec<usize> = (0..n).collect();
    let k = gram(spec, ds, &all, &all)?.values;
    let eig = k.symmetric_eigen();
    // l_i = sum_j u_ij^2 * lambda_j / (lambda_j + gamma); clamp tiny negative
    // eigenvalues from roundoff
    let mut scores = vec![0.0; n];
    for j in 0..n {
        let lam = eig.eigenvalues[j].max(0.0);
        let w = lam / (lam + gamma);
        for i in 0..n {
            let u = eig.eigenvectors[(i, j)];
            scores[i] += u * u * w;
        }
    }
    Ok(scores)
}

/// Sample `m` landmarks without replacement with probability proportional to
/// exact ridge leverage scores.
pub fn rls_exact(
    ds: &Dataset,
    spec: &KernelSpec,
    gamma: f64,
    m: usize,
    seed: u64,
) -> Result<LandmarkSet> {
    if m > ds.n() {
        return Err(Error::CountExceedsData {
            requested: m,
            available: ds.n(),
        });
    }
    let start = Instant::now();
    let mut weights = rls_scores(ds, spec, gamma)?;
    let mut rng = rng_from_seed(seed);
    let mut indices = Vec::with_capacity(m);
    let mut remaining: Vec<usize> = (0..ds.n()).collect();
    for _ in 0..m {
        let total: f64 = remaining.iter().map(|&i| weights[i]).sum();
        let pick = if total > 0.0 {
            let t = rng.gen_range(0.0..total);
            let mut acc = 0.0;
            let mut chosen = remaining.len() - 1;
            for (pos, &i) in remaining.iter().enumerate() {
                acc += weights[i];
                if t < acc {
                    chosen = pos;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..remaining.len())
        };
        let i = remaining.swap_remove(pick);
        weights[i] = 0.0;
        indices.push(i);
    }
    Ok(LandmarkSet::from_indices(
        ds,
        indices,
        "rls-exact",
        m,
        start.elapsed(),
    ))
}

/// Lloyd energy (sum of squared distances to nearest centroid); exposed for
/// tests of the monotonicity of k-means iterations.
pub fn kmeans_energy(ds: &Dataset, centroids: &DMatrix<f64>) -> f64 {
    let mut e = 0.0;
    for i in 0..ds.n() {
        let row = ds.row(i);
        let min_d = (0..centroids.nrows())
            .map(|c| sq_dist(&row, centroids.row(c).transpose().as_slice()))
            .fold(f64::INFINITY, f64::min);
        e += min_d;
    }
    e
}
