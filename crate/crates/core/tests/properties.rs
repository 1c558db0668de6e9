//! Randomized invariants over the generator, data, and kernel primitives.

#![allow(clippy::needless_range_loop)]

use nalgebra::DMatrix;
use proptest::prelude::*;

use anchor_net::dataio::{standardize, subsample, Dataset};
use anchor_net::kernels::{Kernel, KernelFamily, KernelSpec};
use anchor_net::lowdisc::{adaptive_grid, compose_budget, halton, BBox};

fn arb_points(n: usize, d: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-100.0f64..100.0, n * d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn halton_points_stay_in_unit_cube(count in 1usize..200, dim in 1usize..8, start in 1u64..1000) {
        let ps = halton(count, dim, start);
        prop_assert_eq!(ps.len(), count);
        for v in ps.points.iter() {
            prop_assert!((0.0..1.0).contains(v));
        }
    }

    #[test]
    fn composition_sums_to_budget(p in 0usize..30, sides in proptest::collection::vec(0.0f64..10.0, 1..6)) {
        let d = sides.len();
        let lo = vec![0.0; d];
        let bbox = BBox::new(lo, sides.clone());
        let comp = compose_budget(&bbox, p);
        prop_assert_eq!(comp.len(), d);
        prop_assert!(comp.iter().all(|&c| c >= 1));
        // degenerate boxes (all sides zero) collapse to a single point
        if sides.iter().any(|&s| s > 0.0) {
            prop_assert_eq!(comp.iter().sum::<usize>(), p + d);
        }
        let grid = adaptive_grid(&bbox, p);
        prop_assert_eq!(grid.len(), comp.iter().product::<usize>());
        for i in 0..grid.len() {
            for c in 0..d {
                let v = grid.points[(i, c)];
                prop_assert!(v >= 0.0 && v <= sides[c]);
            }
        }
    }

    #[test]
    fn standardize_is_idempotent(raw in arb_points(20, 3)) {
        let ds = Dataset::new(DMatrix::from_row_slice(20, 3, &raw), "prop");
        let once = standardize(&ds);
        let twice = standardize(&once);
        for (a, b) in once.points.iter().zip(twice.points.iter()) {
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn subsample_returns_dataset_rows(raw in arb_points(30, 2), k in 1usize..30, seed in 0u64..1000) {
        let ds = Dataset::new(DMatrix::from_row_slice(30, 2, &raw), "prop");
        let sub = subsample(&ds, k, seed).unwrap();
        prop_assert_eq!(sub.n(), k);
        for i in 0..sub.n() {
            let r = sub.row(i);
            let found = (0..ds.n()).any(|j| ds.row(j) == r);
            prop_assert!(found, "subsampled row not in source");
        }
    }

    #[test]
    fn kernel_eval_is_symmetric(
        x in proptest::collection::vec(-5.0f64..5.0, 3),
        y in proptest::collection::vec(-5.0f64..5.0, 3),
        sigma in 0.1f64..10.0,
    ) {
        for fam in [
            KernelFamily::Gaussian,
            KernelFamily::Multiquadric,
            KernelFamily::Sigmoid,
            KernelFamily::ThinPlate,
        ] {
            let spec = KernelSpec::new(fam, sigma);
            let a = spec.eval(&x, &y);
            let b = spec.eval(&y, &x);
            prop_assert_eq!(a.to_bits(), b.to_bits(), "{} not symmetric", fam);
        }
    }
}
