//! Kernel functions and Gram-block assembly.
//!
//! Four families are supported: Gaussian (SPSD) and three symmetric kernels
//! whose Gram matrices may be indefinite (multiquadric, sigmoid, thin-plate
//! spline).

use nalgebra::DMatrix;
use std::fmt;
use std::str::FromStr;

use crate::dataio::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Gaussian,
    Multiquadric,
    Sigmoid,
    ThinPlate,
}

impl KernelFamily {
    /// Gaussian Gram matrices are positive semi-definite; the other three
    /// families can produce negative eigenvalues.
    pub fn is_spsd(&self) -> bool {
        matches!(self, KernelFamily::Gaussian)
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Multiquadric => "multiquadric",
            KernelFamily::Sigmoid => "sigmoid",
            KernelFamily::ThinPlate => "thinplate",
        };
        f.write_str(s)
    }
}

impl FromStr for KernelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(KernelFamily::Gaussian),
            "multiquadric" => Ok(KernelFamily::Multiquadric),
            "sigmoid" => Ok(KernelFamily::Sigmoid),
            "thinplate" => Ok(KernelFamily::ThinPlate),
            other => Err(Error::InvalidConfig(format!("unknown kernel {other:?}"))),
        }
    }
}

/// A symmetric kernel evaluated on equal-length coordinate slices.
///
/// The trait exists so the diagnostics and factorization code also accept
/// ad-hoc kernels (used by several tests) besides [`KernelSpec`].
pub trait Kernel {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;
}

impl<F: Fn(&[f64], &[f64]) -> f64> Kernel for F {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self(x, y)
    }
}

/// A kernel family with its bandwidth.
#[derive(Debug, Clone, Copy)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub sigma: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, sigma: f64) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        KernelSpec { family, sigma }
    }
}

fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl Kernel for KernelSpec {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        let s2 = self.sigma * self.sigma;
        match self.family {
            KernelFamily::Gaussian => (-dist2(x, y) / s2).exp(),
            KernelFamily::Multiquadric => (dist2(x, y) / s2 + 1.0).sqrt(),
            KernelFamily::Sigmoid => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (dot / self.sigma + 1.0).tanh()
            }
            KernelFamily::ThinPlate => {
                let t = dist2(x, y) / s2;
                // continuous limit of t*ln(t) as t -> 0
                if t == 0.0 {
                    0.0
                } else {
                    t * t.ln()
                }
            }
        }
    }
}

/// Checked single evaluation; errors on dimension mismatch.
pub fn eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(spec.eval(x, y))
}

/// A rectangular block of kernel evaluations between two index sets.
#[derive(Debug, Clone)]
pub struct GramBlock {
    pub values: DMatrix<f64>,
    pub row_set: Vec<usize>,
    pub col_set: Vec<usize>,
}

/// Assemble `K[rows, cols]` for a dataset.
pub fn gram<K: Kernel>(
    kernel: &K,
    ds: &Dataset,
    rows: &[usize],
    cols: &[usize],
) -> Result<GramBlock> {
    for &i in rows.iter().chain(cols) {
        if i >= ds.n() {
            return Err(Error::IndexOutOfRange { index: i, len: ds.n() });
        }
    }
    let d = ds.d();
    let mut values = DMatrix::zeros(rows.len(), cols.len());
    let data = ds.points.as_slice(); // column-major
    let n = ds.n();
    let mut xi = vec![0.0; d];
    let mut yj = vec![0.0; d];
    for (bi, &i) in rows.iter().enumerate() {
        for k in 0..d {
            xi[k] = data[k * n + i];
        }
        for (bj, &j) in cols.iter().enumerate() {
            for k in 0..d {
                yj[k] = data[k * n + j];
            }
            values[(bi, bj)] = kernel.eval(&xi, &yj);
        }
    }
    Ok(GramBlock {
        values,
        row_set: rows.to_vec(),
        col_set: cols.to_vec(),
    })
}

/// Kernel matrix between two free point sets (rows of `a` vs rows of `b`).
pub fn gram_points<K: Kernel>(kernel: &K, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols());
    let d = a.ncols();
    let mut out = DMatrix::zeros(a.nrows(), b.nrows());
    let mut xi = vec![0.0; d];
    let mut yj = vec![0.0; d];
    for i in 0..a.nrows() {
        for k in 0..d {
            xi[k] = a[(i, k)];
        }
        for j in 0..b.nrows() {
            for k in 0..d {
                yj[k] = b[(j, k)];
            }
            out[(i, j)] = kernel.eval(&xi, &yj);
        }
    }
    out
}

/// Shift the diagonal of a square block by `beta`.
pub fn regularize(block: &GramBlock, beta: f64) -> Result<GramBlock> {
    if block.values.nrows() != block.values.ncols() {
        return Err(Error::NonSquareBlock {
            rows: block.values.nrows(),
            cols: block.values.ncols(),
        });
    }
    let mut out = block.clone();
    for i in 0..out.values.nrows() {
        out.values[(i, i)] += beta;
    }
    Ok(out)
}
