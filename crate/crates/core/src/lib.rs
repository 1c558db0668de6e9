//! Anchor-net Nyström approximation of symmetric kernel matrices.
//!
//! The library builds low-rank approximations `K ≈ K_XS K_SS⁺ K_SX` of kernel
//! matrices — including indefinite ones — from landmark sets selected by a
//! low-discrepancy anchor net, alongside baseline selectors (uniform,
//! k-means, farthest-point, ridge leverage scores) and a pivoted-Cholesky
//! baseline for the SPSD case. Error diagnostics (marking errors, fill
//! distance, max-norm bounds) and a benchmark sweep harness with CSV export
//! round out the toolkit; the `nysbench` binary exposes it all on the
//! command line.

// index-based loops are the clearer idiom for the coordinate-wise numeric
// kernels in this crate
#![allow(clippy::needless_range_loop)]

pub mod anchornet;
pub mod bench;
pub mod dataio;
pub mod diagnostics;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod lowdisc;
pub mod nystrom;
pub mod rng;
pub mod selectors;

pub use error::{Error, Result};
