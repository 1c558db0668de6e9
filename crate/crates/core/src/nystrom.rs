//! Nyström factorization K ≈ K_XS K_SS⁺ K_SX with stabilized variants, the
//! pivoted-Cholesky baseline, and approximation-error measurement.
//!
//! All stabilization modes reduce to the same runtime representation: an n×r
//! left factor `k_xs` and an r×r `core` such that the approximation is
//! `k_xs · core · k_xsᵀ`. For the plain and ε-truncated pseudoinverse the
//! left factor is the cross block rotated into the eigenbasis of K_SS and the
//! core is the diagonal of truncated inverse eigenvalues (keeping the
//! pseudoinverse factored avoids cancellation when |λ_min| is tiny); for the
//! QR-based variant the left factor is the raw cross block and the core is
//! `R_ε⁺ Qᵀ`, generally nonsymmetric.

use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::anchornet::LandmarkSet;
use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{gram_points, Kernel, KernelSpec};
use crate::linalg::{default_cutoff, spectral_norm_op, svd_pinv};
use crate::rng::{rng_from_seed, sample_without_replacement};

/// Largest point count for which dense n×n work (2-norm errors, full
/// Cholesky targets) is permitted.
pub const DENSE_GUARD: usize = 5000;

const POWER_TOL: f64 = 1e-6;
const POWER_ITERS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stabilization {
    /// Plain pseudoinverse with the conventional cutoff r·eps·σ_max.
    None,
    /// Zero every singular value of K_SS below the given ε before inversion.
    PinvEps(f64),
    /// K_SS = QR; truncate R's singular values below ε; core = R_ε⁺ Qᵀ.
    QrEps(f64),
}

impl fmt::Display for Stabilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stabilization::None => write!(f, "none"),
            Stabilization::PinvEps(e) => write!(f, "pinv-eps({e})"),
            Stabilization::QrEps(e) => write!(f, "qr-eps({e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    Two,
    Fro,
    Max,
}

impl fmt::Display for ErrorNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorNorm::Two => "two",
            ErrorNorm::Fro => "fro",
            ErrorNorm::Max => "max",
        };
        f.write_str(s)
    }
}

impl FromStr for ErrorNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" => Ok(ErrorNorm::Two),
            "fro" => Ok(ErrorNorm::Fro),
            "max" => Ok(ErrorNorm::Max),
            other => Err(Error::InvalidConfig(format!("unknown norm {other:?}"))),
        }
    }
}

/// A rank-r factorization `k_xs · core · k_xsᵀ` of the (possibly shifted)
/// kernel matrix, together with conditioning diagnostics of K_SS. `k_xs` is
/// the *left factor*, not necessarily the raw cross block: the pinv modes
/// store K_XS rotated into the K_SS eigenbasis, and the Cholesky baseline
/// stores L.
#[derive(Debug, Clone)]
pub struct NystromFactors {
    pub k_xs: DMatrix<f64>,
    pub core: DMatrix<f64>,
    pub stabilization: Stabilization,
    /// Dataset indices of the landmarks; empty for centroid landmarks.
    pub indices: Vec<usize>,
    pub min_sv: f64,
    pub max_sv: f64,
    /// ||K_SS⁺||₂ = 1 / (smallest retained singular value); NaN for the
    /// Cholesky baseline where no pseudoinverse is formed.
    pub pinv_norm: f64,
    /// Whether the core is symmetric (false only for qr-eps).
    pub symmetric_core: bool,
    pub select_time: Duration,
    pub factor_time: Duration,
}

impl NystromFactors {
    pub fn n(&self) -> usize {
        self.k_xs.nrows()
    }

    pub fn rank(&self) -> usize {
        self.k_xs.ncols()
    }

    /// Dense n×n reconstruction; test/diagnostic helper, O(n²r).
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.k_xs * &self.core * self.k_xs.transpose()
    }
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub norm_kind: ErrorNorm,
    pub value: f64,
    /// value / ||K|| in the same norm; NaN when the reference norm is zero.
    pub relative: f64,
    pub eval_size: usize,
    pub t_select: Duration,
    pub t_factor: Duration,
    pub t_eval: Duration,
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFiniteKernel { i, j });
            }
        }
    }
    Ok(())
}

/// Factor the Nyström approximation of K (or K+βI) for the given landmarks.
///
/// `beta` shifts the target matrix; it is added to K_SS only when the
/// landmarks are dataset rows, so that the factorization consistently
/// approximates K+βI. For centroid landmarks the shift applies to the target
/// alone.
pub fn factor<K: Kernel>(
    ds: &Dataset,
    lm: &LandmarkSet,
    kernel: &K,
    stabilization: Stabilization,
    beta: f64,
) -> Result<NystromFactors> {
    let r = lm.m_actual();
    if r == 0 {
        return Err(Error::EmptyInput("landmark set"));
    }
    if lm.coords.ncols() != ds.d() {
        return Err(Error::DimensionMismatch {
            left: lm.coords.ncols(),
            right: ds.d(),
        });
    }
    let start = Instant::now();
    let k_xs = gram_points(kernel, &ds.points, &lm.coords);
    let mut k_ss = gram_points(kernel, &lm.coords, &lm.coords);
    check_finite(&k_xs)?;
    check_finite(&k_ss)?;
    if beta > 0.0 && !lm.indices.is_empty() {
        for i in 0..r {
            k_ss[(i, i)] += beta;
        }
    }

    let (k_left, core, min_sv, max_sv, pinv_norm, symmetric_core) = match stabilization {
        Stabilization::None | Stabilization::PinvEps(_) => {
            // symmetric eigendecomposition K_SS = Q Λ Qᵀ; singular values are
            // the |λ_i|, and the truncated pseudoinverse is Q Λ_ε⁺ Qᵀ
            let eig = k_ss.clone().symmetric_eigen();
            let max_sv = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
            let min_sv = eig
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |a, &l| a.min(l.abs()));
            let cutoff = match stabilization {
                Stabilization::PinvEps(eps) => eps,
                _ => default_cutoff(&k_ss, max_sv),
            };
            let mut inv = DVector::zeros(r);
            let mut min_retained = f64::INFINITY;
            for i in 0..r {
                let l = eig.eigenvalues[i];
                if l.abs() >= cutoff && l.abs() > 0.0 {
                    inv[i] = 1.0 / l;
                    min_retained = min_retained.min(l.abs());
                }
            }
            let pinv_norm = if min_retained.is_finite() {
                1.0 / min_retained
            } else {
                0.0
            };
            // The pseudoinverse is kept in factored form: the cross block is
            // rotated into the eigenbasis and the core stays diagonal. The
            // near-null columns of K_XS·Q are O(|λ|) *before* the 1/λ scaling,
            // so their products stay small; an explicit dense pinv would incur
            // O(eps_mach / λ_min)-sized cancellation errors in k_xs·core.
            let k_left = &k_xs * &eig.eigenvectors;
            (
                k_left,
                DMatrix::from_diagonal(&inv),
                if min_sv.is_finite() { min_sv } else { 0.0 },
                max_sv,
                pinv_norm,
                true,
            )
        }
        Stabilization::QrEps(eps) => {
            let qr = k_ss.clone().qr();
            let q = qr.q();
            let rmat = qr.r();
            let p = svd_pinv(&rmat, eps);
            let pinv_norm = p.min_retained.map_or(0.0, |s| 1.0 / s);
            // Q is orthogonal, so R and K_SS share singular values.
            (
                k_xs.clone(),
                p.pinv * q.transpose(),
                p.min_sv,
                p.max_sv,
                pinv_norm,
                false,
            )
        }
    };

    Ok(NystromFactors {
        k_xs: k_left,
        core,
        stabilization,
        indices: lm.indices.clone(),
        min_sv,
        max_sv,
        pinv_norm,
        symmetric_core,
        select_time: lm.select_time,
        factor_time: start.elapsed(),
    })
}

/// Apply the approximation to a vector without forming the n×n product.
pub fn apply(f: &NystromFactors, v: &DVector<f64>) -> Result<DVector<f64>> {
    if v.len() != f.n() {
        return Err(Error::DimensionMismatch {
            left: v.len(),
            right: f.n(),
        });
    }
    let t = f.k_xs.transpose() * v;
    Ok(&f.k_xs * (&f.core * t))
}

/// Dense target block K[idx, idx] (+ βI) — shared by error measurement and
/// the Cholesky baseline.
pub fn dense_target<K: Kernel>(
    ds: &Dataset,
    kernel: &K,
    idx: &[usize],
    beta: f64,
) -> Result<DMatrix<f64>> {
    let block = crate::kernels::gram(kernel, ds, idx, idx)?;
    let mut k = block.values;
    if beta > 0.0 {
        for i in 0..k.nrows() {
            k[(i, i)] += beta;
        }
    }
    Ok(k)
}

/// Norm of a dense symmetric target, matching the estimator used for errors.
pub fn target_norm_dense(k_tgt: &DMatrix<f64>, norm: ErrorNorm) -> f64 {
    match norm {
        ErrorNorm::Two => {
            let op = |v: &DVector<f64>| k_tgt * v;
            spectral_norm_op(k_tgt.nrows(), op, op, POWER_TOL, POWER_ITERS)
        }
        ErrorNorm::Fro => k_tgt.iter().map(|x| x * x).sum::<f64>().sqrt(),
        ErrorNorm::Max => k_tgt.iter().fold(0.0f64, |a, x| a.max(x.abs())),
    }
}

/// Error ||K_tgt − approx[rows, rows]|| in the requested norm, with the
/// target supplied dense (so sweeps can assemble it once and reuse it).
/// `rows` maps the rows/columns of `k_tgt` to rows of `f.k_xs`.
pub fn error_norm_dense(
    k_tgt: &DMatrix<f64>,
    rows: &[usize],
    f: &NystromFactors,
    norm: ErrorNorm,
) -> f64 {
    let m = rows.len();
    assert_eq!(k_tgt.nrows(), m);
    let r = f.rank();
    let mut k_is = DMatrix::zeros(m, r);
    for (bi, &i) in rows.iter().enumerate() {
        for c in 0..r {
            k_is[(bi, c)] = f.k_xs[(i, c)];
        }
    }
    match norm {
        ErrorNorm::Two => {
            // Operator form: E v = K_tgt v − K_IS (core (K_ISᵀ v)); never
            // materializes the dense error matrix.
            let op = |v: &DVector<f64>| k_tgt * v - &k_is * (&f.core * (k_is.transpose() * v));
            if f.symmetric_core {
                spectral_norm_op(m, op, op, POWER_TOL, POWER_ITERS)
            } else {
                let adj =
                    |v: &DVector<f64>| k_tgt.transpose() * v - &k_is * (f.core.transpose() * (k_is.transpose() * v));
                spectral_norm_op(m, op, adj, POWER_TOL, POWER_ITERS)
            }
        }
        ErrorNorm::Fro | ErrorNorm::Max => {
            let w = &k_is * &f.core; // m×r, row i · k_is row j = approx_ij
            let mut sum = 0.0f64;
            let mut max = 0.0f64;
            for j in 0..m {
                for i in 0..m {
                    let mut a = 0.0;
                    for c in 0..r {
                        a += w[(i, c)] * k_is[(j, c)];
                    }
                    let e = k_tgt[(i, j)] - a;
                    sum += e * e;
                    max = max.max(e.abs());
                }
            }
            if norm == ErrorNorm::Fro {
                sum.sqrt()
            } else {
                max
            }
        }
    }
}

/// Measure the approximation error of `f` against K (or K+βI) in the
/// requested norm, over the full dataset or a seeded subset.
pub fn approx_error<K: Kernel>(
    ds: &Dataset,
    f: &NystromFactors,
    kernel: &K,
    norm: ErrorNorm,
    eval_subset: Option<(usize, u64)>,
    beta: f64,
) -> Result<ErrorReport> {
    if f.n() != ds.n() {
        return Err(Error::DimensionMismatch {
            left: f.n(),
            right: ds.n(),
        });
    }
    let idx: Vec<usize> = match eval_subset {
        Some((size, seed)) => {
            if size > ds.n() {
                return Err(Error::CountExceedsData {
                    requested: size,
                    available: ds.n(),
                });
            }
            let mut rng = rng_from_seed(seed);
            let mut s = sample_without_replacement(&mut rng, ds.n(), size);
            s.sort_unstable();
            s
        }
        None => (0..ds.n()).collect(),
    };
    if idx.len() > DENSE_GUARD {
        // Dense work is capped; 2-norm has no streaming fallback.
        if norm == ErrorNorm::Two {
            return Err(Error::OverGuard {
                n: idx.len(),
                guard: DENSE_GUARD,
            });
        }
        let start = Instant::now();
        let (value, reference) = streamed_error(ds, f, kernel, &idx, norm, beta);
        return Ok(report(f, norm, value, reference, idx.len(), start.elapsed()));
    }
    let start = Instant::now();
    let k_tgt = dense_target(ds, kernel, &idx, beta)?;
    let value = error_norm_dense(&k_tgt, &idx, f, norm);
    let reference = target_norm_dense(&k_tgt, norm);
    Ok(report(f, norm, value, reference, idx.len(), start.elapsed()))
}

fn report(
    f: &NystromFactors,
    norm: ErrorNorm,
    value: f64,
    reference: f64,
    eval_size: usize,
    t_eval: Duration,
) -> ErrorReport {
    ErrorReport {
        norm_kind: norm,
        value,
        relative: if reference > 0.0 {
            value / reference
        } else {
            f64::NAN
        },
        eval_size,
        t_select: f.select_time,
        t_factor: f.factor_time,
        t_eval,
    }
}

/// Fro/max error over a subset too large to hold dense: kernel entries are
/// evaluated on the fly and discarded.
fn streamed_error<K: Kernel>(
    ds: &Dataset,
    f: &NystromFactors,
    kernel: &K,
    idx: &[usize],
    norm: ErrorNorm,
    beta: f64,
) -> (f64, f64) {
    let m = idx.len();
    let r = f.rank();
    let mut w = DMatrix::zeros(m, r);
    let mut k_is = DMatrix::zeros(m, r);
    for (bi, &i) in idx.iter().enumerate() {
        for c in 0..r {
            k_is[(bi, c)] = f.k_xs[(i, c)];
        }
    }
    w.copy_from(&(&k_is * &f.core));
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| ds.row(i)).collect();
    let mut err_sum = 0.0f64;
    let mut err_max = 0.0f64;
    let mut ref_sum = 0.0f64;
    let mut ref_max = 0.0f64;
    for j in 0..m {
        for i in 0..m {
            let mut k = kernel.eval(&rows[i], &rows[j]);
            if i == j {
                k += beta;
            }
            let mut a = 0.0;
            for c in 0..r {
                a += w[(i, c)] * k_is[(j, c)];
            }
            let e = k - a;
            err_sum += e * e;
            err_max = err_max.max(e.abs());
            ref_sum += k * k;
            ref_max = ref_max.max(k.abs());
        }
    }
    match norm {
        ErrorNorm::Fro => (err_sum.sqrt(), ref_sum.sqrt()),
        ErrorNorm::Max => (err_max, ref_max),
        ErrorNorm::Two => unreachable!("two-norm is guarded before streaming"),
    }
}

/// Output of the greedy pivoted Cholesky on an explicit SPSD matrix.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    /// n×t factor with K ≈ L Lᵀ (t ≤ requested rank).
    pub l: DMatrix<f64>,
    /// Pivot order (row indices of the input matrix).
    pub pivots: Vec<usize>,
    /// Diagonal of K − L Lᵀ after the last step.
    pub residual_diag: Vec<f64>,
}

/// Greedy diagonally pivoted Cholesky; stops early when the largest residual
/// diagonal entry becomes nonpositive.
pub fn pivoted_cholesky_matrix(k: &DMatrix<f64>, rank: usize) -> Result<PivotedCholesky> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::NonSquareBlock {
            rows: n,
            cols: k.ncols(),
        });
    }
    if rank > n {
        return Err(Error::CountExceedsData {
            requested: rank,
            available: n,
        });
    }
    let mut diag: Vec<f64> = (0..n).map(|i| k[(i, i)]).collect();
    let mut l = DMatrix::zeros(n, rank);
    let mut pivots = Vec::with_capacity(rank);
    let mut t = 0;
    while t < rank {
        let mut p = 0;
        for i in 1..n {
            if diag[i] > diag[p] {
                p = i;
            }
        }
        if diag[p] <= 0.0 {
            break;
        }
        let scale = diag[p].sqrt();
        for i in 0..n {
            let mut c = k[(i, p)];
            for s in 0..t {
                c -= l[(i, s)] * l[(p, s)];
            }
            l[(i, t)] = c / scale;
        }
        for i in 0..n {
            diag[i] -= l[(i, t)] * l[(i, t)];
        }
        pivots.push(p);
        t += 1;
    }
    Ok(PivotedCholesky {
        l: l.columns(0, t).into_owned(),
        pivots,
        residual_diag: diag,
    })
}

/// Pivoted-Cholesky baseline on a dataset kernel; SPSD families only.
pub fn pivoted_cholesky(
    ds: &Dataset,
    spec: &KernelSpec,
    rank: usize,
    beta: f64,
) -> Result<NystromFactors> {
    if !spec.family.is_spsd() {
        return Err(Error::IndefiniteKernel {
            method: "pivoted cholesky",
            family: spec.family.to_string(),
        });
    }
    if ds.n() > DENSE_GUARD {
        return Err(Error::OverGuard {
            n: ds.n(),
            guard: DENSE_GUARD,
        });
    }
    let start = Instant::now();
    let all: Vec<usize> = (0..ds.n()).collect();
    let k = dense_target(ds, spec, &all, beta)?;
    let pc = pivoted_cholesky_matrix(&k, rank)?;
    let t = pc.l.ncols();
    let first = pc.pivots.first().map_or(0.0, |&p| k[(p, p)]);
    let last = if t > 0 {
        let p = pc.pivots[t - 1];
        let col = pc.l.column(t - 1);
        col[p] * col[p]
    } else {
        0.0
    };
    Ok(NystromFactors {
        k_xs: pc.l,
        core: DMatrix::identity(t, t),
        stabilization: Stabilization::None,
        indices: pc.pivots,
        min_sv: last,
        max_sv: first,
        pinv_norm: f64::NAN,
        symmetric_core: true,
        select_time: Duration::ZERO,
        factor_time: start.elapsed(),
    })
}
