//! Acceptance suite: ten end-to-end checks covering the error bound, the
//! marking-error toys, grid-size and coverage guarantees, exactness oracles,
//! selection-cost scaling, the qualitative benchmark reproductions, and the
//! discrepancy oracles. Full-scale public-dataset experiments are replaced by
//! a deterministic synthetic stand-in at the same size (n = 4177, d = 8).
//!
//! Everything runs sequentially in one test so the timing-sensitive check is
//! not perturbed by sibling tests, and so the per-criterion pass/fail lines
//! appear in order (`cargo test --test acceptance -- --nocapture`).

use std::time::Instant;

use nalgebra::DMatrix;

use anchor_net::anchornet::{self, AnchorNetConfig, LandmarkSet};
use anchor_net::bench::{run_sweep, Method, SigmaRule, SweepConfig};
use anchor_net::dataio::{standardize, synth_clusters, ClusterSpec, Dataset};
use anchor_net::diagnostics::{marking_errors, marking_errors_naive};
use anchor_net::kernels::{KernelFamily, KernelSpec};
use anchor_net::lowdisc::{
    adaptive_grid, halton, star_discrepancy, BBox, DiscrepancyMethod, Region,
};
use anchor_net::nystrom::{
    approx_error, dense_target, factor, pivoted_cholesky_matrix, ErrorNorm, Stabilization,
};
use anchor_net::rng::{derive_seed, rng_from_seed, sample_without_replacement};

type CriterionResult = Result<String, String>;
type Criterion = fn() -> CriterionResult;

fn lm_from(ds: &Dataset, idx: &[usize]) -> LandmarkSet {
    LandmarkSet::from_indices(ds, idx.to_vec(), "test", idx.len(), std::time::Duration::ZERO)
}

/// Deterministic synthetic stand-in for the n = 4177, d = 8 benchmark
/// dataset (the real one is not fetchable in this environment): a non-uniform
/// five-cluster mixture, standardized.
fn standin_4177() -> Dataset {
    let clusters = vec![
        ClusterSpec {
            center: vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            spread: 1.0,
            count: 1200,
        },
        ClusterSpec {
            center: vec![2.5, 1.0, -1.5, 0.5, 2.0, -0.5, 1.5, 0.0],
            spread: 0.6,
            count: 1000,
        },
        ClusterSpec {
            center: vec![-2.0, 2.0, 1.0, -1.0, 0.0, 1.5, -1.0, 2.0],
            spread: 1.4,
            count: 900,
        },
        ClusterSpec {
            center: vec![1.0, -2.5, 0.5, 2.0, -1.5, 0.0, 0.5, -2.0],
            spread: 0.3,
            count: 700,
        },
        ClusterSpec {
            center: vec![-1.0, -1.0, -2.0, -1.5, 1.0, 2.5, 2.0, 1.0],
            spread: 2.0,
            count: 377,
        },
    ];
    let ds = synth_clusters(&clusters, 0xaba1).unwrap();
    assert_eq!(ds.n(), 4177);
    standardize(&ds)
}

/// Non-uniform 2D synthetic dataset in the spirit of the pixel-cloud
/// instance used for the stabilization comparison: three disk-shaped blobs
/// of different radii and densities with compact support. The tiny spatial
/// scale keeps the sigmoid Gram matrix numerically low-rank with a clean
/// spectral gap, which is the regime the stabilization comparison probes.
fn standin_2d() -> Dataset {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0f);
    let blobs: &[((f64, f64), f64, usize)] = &[
        ((0.012, 0.008), 0.016, 250),
        ((-0.018, 0.014), 0.008, 180),
        ((0.01, -0.018), 0.01, 170),
    ];
    let mut rows = Vec::new();
    for &((cx, cy), r, count) in blobs {
        for _ in 0..count {
            let th: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            let rad = r * rng.gen::<f64>().sqrt();
            rows.push((cx + rad * th.cos(), cy + rad * th.sin()));
        }
    }
    let n = rows.len();
    Dataset::new(
        DMatrix::from_fn(n, 2, |i, j| if j == 0 { rows[i].0 } else { rows[i].1 }),
        "blobs-2d",
    )
}

// 1. On seeded random instances with nonsingular K_SS, the max-norm Nyström
// error never exceeds e_r + 2*e_hat_r + pinv_norm*e_hat_r^2.
fn criterion_1() -> CriterionResult {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut seed = 0u64;
    while checked < 100 {
        seed += 1;
        let d = 1 + (seed % 5) as usize;
        let n = 30 + (seed % 171) as usize; // up to 200
        let fam = match seed % 4 {
            0 => KernelFamily::Gaussian,
            1 => KernelFamily::Multiquadric,
            2 => KernelFamily::Sigmoid,
            _ => KernelFamily::ThinPlate,
        };
        let ds = synth_clusters(
            &[ClusterSpec {
                center: vec![0.2; d],
                spread: 1.5,
                count: n,
            }],
            derive_seed(seed, &[10]),
        )
        .unwrap();
        let r = 2 + (seed % 19) as usize;
        let mut rng = rng_from_seed(derive_seed(seed, &[11]));
        let mut idx = sample_without_replacement(&mut rng, n, r);
        idx.sort_unstable();
        let lm = lm_from(&ds, &idx);
        let spec = KernelSpec::new(fam, 1.0);
        let f = factor(&ds, &lm, &spec, Stabilization::None, 0.0)
            .map_err(|e| format!("factor failed: {e}"))?;
        if f.min_sv <= 1e3 * f64::EPSILON * f.max_sv {
            continue; // numerically singular draw; redraw
        }
        let rep = approx_error(&ds, &f, &spec, ErrorNorm::Max, None, 0.0)
            .map_err(|e| format!("approx_error failed: {e}"))?;
        let me = marking_errors(&ds, &lm, &spec).map_err(|e| format!("marking: {e}"))?;
        if rep.value > me.bound * (1.0 + 1e-8) {
            return Err(format!(
                "seed {seed} ({fam}, n={n}, r={r}): error {} > bound {}",
                rep.value, me.bound
            ));
        }
        checked += 1;
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs() >= 60 {
        return Err(format!("took {elapsed:?}, budget 1 minute"));
    }
    Ok(format!("100 instances verified in {elapsed:.2?}"))
}

// 2. Marking-error toy on X = {i/10} with kappa = |x-y|^2.
fn criterion_2() -> CriterionResult {
    let pts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let ds = Dataset::new(DMatrix::from_column_slice(11, 1, &pts), "grid11");
    let kernel = |x: &[f64], y: &[f64]| -> f64 {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
    };
    let one = marking_errors(&ds, &lm_from(&ds, &[10]), &kernel)
        .map_err(|e| format!("marking: {e}"))?;
    if (one.e_hat_r - 1.0).abs() > 1e-15 {
        return Err(format!("single landmark: e_hat = {}, want 1", one.e_hat_r));
    }
    let lm2 = lm_from(&ds, &[0, 10]);
    let two = marking_errors(&ds, &lm2, &kernel).map_err(|e| format!("marking: {e}"))?;
    let (oracle_e, oracle_ehat) =
        marking_errors_naive(&ds, &lm2, &kernel).map_err(|e| format!("oracle: {e}"))?;
    if (two.e_hat_r - oracle_ehat).abs() > 1e-12 || (two.e_r - oracle_e).abs() > 1e-12 {
        return Err(format!(
            "two landmarks: ({}, {}) vs oracle ({oracle_e}, {oracle_ehat})",
            two.e_r, two.e_hat_r
        ));
    }
    // frozen oracle values: the univariate error peaks at x = 0.5
    if (oracle_ehat - 10.0f64.sqrt() / 4.0).abs() > 1e-12 {
        return Err(format!("oracle drifted: e_hat = {oracle_ehat}"));
    }
    Ok(format!(
        "e_hat_1 = 1 exactly; e_hat_2 = {:.12} matches the exhaustive oracle",
        two.e_hat_r
    ))
}

// 3. Every adaptive tensor grid respects size <= ((p+d)/d)^d, which is < e^p
// for p >= 1 (and equals e^0 = 1 at p = 0).
fn criterion_3() -> CriterionResult {
    let start = Instant::now();
    for d in 1..=10usize {
        for p in 0..=12usize {
            let grid = adaptive_grid(&BBox::unit(d), p);
            let size = grid.len() as f64;
            let cap = ((p + d) as f64 / d as f64).powi(d as i32);
            if size > cap + 1e-9 {
                return Err(format!("d={d}, p={p}: size {size} > ((p+d)/d)^d = {cap}"));
            }
            let ep = (p as f64).exp();
            let ok = if p == 0 { cap <= ep } else { cap < ep };
            if !ok {
                return Err(format!("d={d}, p={p}: cap {cap} !< e^p = {ep}"));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs() >= 10 {
        return Err(format!("took {elapsed:?}, budget 10 seconds"));
    }
    Ok(format!("130 (d, p) grids verified in {elapsed:.2?}"))
}

// 4. Anchor-net coverage and proportional allocation on 50 seeded datasets.
fn criterion_4() -> CriterionResult {
    for seed in 0..50u64 {
        let d = 1 + (seed % 4) as usize;
        let ds = synth_clusters(
            &[
                ClusterSpec {
                    center: vec![0.0; d],
                    spread: 1.0,
                    count: 120,
                },
                ClusterSpec {
                    center: vec![3.0; d],
                    spread: 0.4,
                    count: 80,
                },
            ],
            derive_seed(seed, &[40]),
        )
        .unwrap();
        let m = 10 + (seed % 20) as usize;
        let net = anchornet::build(&ds, m, &AnchorNetConfig::default())
            .map_err(|e| format!("seed {seed}: build failed: {e}"))?;
        for i in 0..ds.n() {
            let p = ds.row(i);
            if !net.boxes.iter().any(|b| b.contains(&p)) {
                return Err(format!("seed {seed}: point {i} outside every group box"));
            }
        }
        let total: f64 = net.volumes.iter().sum();
        if total > 0.0 {
            let sizes = anchornet::allocate_sizes(&net.volumes, m)
                .map_err(|e| format!("seed {seed}: allocate failed: {e}"))?;
            for (i, (&mi, &vol)) in sizes.iter().zip(&net.volumes).enumerate() {
                if vol <= 0.0 {
                    continue;
                }
                let share = m as f64 * vol / total;
                let gap = mi as f64 - share;
                if !(0.0..1.0).contains(&gap) {
                    return Err(format!(
                        "seed {seed}, group {i}: M_i - share = {gap} outside [0, 1)"
                    ));
                }
            }
        }
    }
    Ok("50 datasets: full closed-box coverage, allocation gap in [0, 1)".into())
}

// 5. Exactness oracles.
fn criterion_5() -> CriterionResult {
    // S = X on a nonsingular Gaussian Gram matrix
    let ds = synth_clusters(
        &[ClusterSpec {
            center: vec![0.0, 0.0],
            spread: 1.5,
            count: 25,
        }],
        51,
    )
    .unwrap();
    let spec = KernelSpec::new(KernelFamily::Gaussian, 1.0);
    let all: Vec<usize> = (0..ds.n()).collect();
    let f = factor(&ds, &lm_from(&ds, &all), &spec, Stabilization::None, 0.0)
        .map_err(|e| format!("factor: {e}"))?;
    let k = dense_target(&ds, &spec, &all, 0.0).map_err(|e| format!("target: {e}"))?;
    let rel = (f.reconstruct() - &k).norm() / k.norm();
    if rel > 1e-10 {
        return Err(format!("S = X relative error {rel} > 1e-10"));
    }
    // exact rank-1 kernel, one landmark
    let pts: Vec<f64> = (1..=20).map(|i| i as f64 / 3.0).collect();
    let ds1 = Dataset::new(DMatrix::from_column_slice(20, 1, &pts), "rank1");
    let dot = |x: &[f64], y: &[f64]| x[0] * y[0];
    let f1 = factor(&ds1, &lm_from(&ds1, &[7]), &dot, Stabilization::None, 0.0)
        .map_err(|e| format!("rank-1 factor: {e}"))?;
    let rec = f1.reconstruct();
    for i in 0..20 {
        for j in 0..20 {
            if (rec[(i, j)] - pts[i] * pts[j]).abs() > 1e-12 {
                return Err(format!("rank-1 entry ({i}, {j}) off by more than 1e-12"));
            }
        }
    }
    // pivoted Cholesky at full rank
    let pc = pivoted_cholesky_matrix(&k, k.nrows()).map_err(|e| format!("chol: {e}"))?;
    let rel = (&pc.l * pc.l.transpose() - &k).norm() / k.norm();
    if rel > 1e-8 {
        return Err(format!("full-rank Cholesky relative fro {rel} > 1e-8"));
    }
    Ok("S = X, rank-1, and full-rank Cholesky reconstructions all exact".into())
}

// 6. Anchor-net selection cost grows at most linearly in n (<= 2.5x per
// doubling), measured as the median of 5 runs at n, 2n, 4n.
fn criterion_6() -> CriterionResult {
    let start = Instant::now();
    let m = 200usize;
    let d = 4usize;
    let cfg = AnchorNetConfig::default();
    let mut medians = Vec::new();
    for &n in &[25_000usize, 50_000, 100_000] {
        let ds = synth_clusters(
            &[
                ClusterSpec {
                    center: vec![0.0; d],
                    spread: 1.0,
                    count: n / 2,
                },
                ClusterSpec {
                    center: vec![2.0; d],
                    spread: 0.5,
                    count: n - n / 2,
                },
            ],
            61,
        )
        .unwrap();
        let mut times: Vec<f64> = (0..5)
            .map(|_| {
                let t = Instant::now();
                let lm = anchornet::select_landmarks(&ds, m, &cfg).unwrap();
                assert!(lm.m_actual() >= 1);
                t.elapsed().as_secs_f64()
            })
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians.push(times[2]);
    }
    for w in medians.windows(2) {
        let ratio = w[1] / w[0];
        if ratio > 2.5 {
            return Err(format!(
                "doubling ratio {ratio:.2} > 2.5 (medians {medians:?})"
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs() >= 120 {
        return Err(format!("took {elapsed:?}, budget 2 minutes"));
    }
    Ok(format!(
        "medians {:?} s, ratios within 2.5x, total {elapsed:.2?}",
        medians.iter().map(|t| (t * 1e3).round() / 1e3).collect::<Vec<_>>()
    ))
}

// 7. Indefinite-kernel benchmark: anchor-net 2-norm error beats the mean
// uniform error at >= 80% of (kernel, rank) cells on the n = 4177 stand-in.
fn criterion_7() -> CriterionResult {
    let start = Instant::now();
    let ds = standin_4177();
    let ranks = vec![50usize, 100, 150, 200, 250];
    let mut wins = 0usize;
    let mut cells = 0usize;
    let mut detail = String::new();
    for fam in [
        KernelFamily::Multiquadric,
        KernelFamily::Sigmoid,
        KernelFamily::ThinPlate,
    ] {
        let cfg = SweepConfig {
            kernel: fam,
            sigma: SigmaRule::HalfRadius,
            methods: vec![Method::AnchorNet, Method::Uniform],
            ranks: ranks.clone(),
            runs: 10,
            norm: Some(ErrorNorm::Two),
            seed: 7,
            timings: false,
            // a coarser tessellation suits this blob-mixture dataset: with the
            // default multiplier nearly every cell holds a single landmark and
            // the sweep wastes budget on stray points
            tess_mult: 2.0,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&ds, &cfg).map_err(|e| format!("{fam} sweep: {e}"))?;
        for &rank in &ranks {
            let anchor: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == "anchornet" && r.m_requested == rank)
                .map(|r| r.err_value)
                .collect();
            let uniform: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == "uniform" && r.m_requested == rank)
                .map(|r| r.err_value)
                .collect();
            if anchor.len() != 1 || uniform.len() != 10 {
                return Err(format!(
                    "{fam} rank {rank}: unexpected row counts ({}, {})",
                    anchor.len(),
                    uniform.len()
                ));
            }
            let mean_u = uniform.iter().sum::<f64>() / uniform.len() as f64;
            cells += 1;
            if anchor[0] <= mean_u {
                wins += 1;
            } else {
                detail.push_str(&format!(" [{fam}@{rank}: {:.3e} > {mean_u:.3e}]", anchor[0]));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs() >= 600 {
        return Err(format!("took {elapsed:?}, budget 10 minutes"));
    }
    if (wins as f64) < 0.8 * cells as f64 {
        return Err(format!("anchor-net won only {wins}/{cells} cells;{detail}"));
    }
    Ok(format!(
        "anchor-net <= mean uniform at {wins}/{cells} cells in {elapsed:.2?}{detail}"
    ))
}

// 8. SPSD instability: with a large Gaussian bandwidth and no regularization,
// anchor-net errors stay monotone within noise while uniform sampling's
// K_SS min_sv collapses below the numerical-nonsingularity threshold.
fn criterion_8() -> CriterionResult {
    let start = Instant::now();
    let ds = standin_4177();
    let cfg = SweepConfig {
        kernel: KernelFamily::Gaussian,
        sigma: SigmaRule::Absolute(11.8),
        methods: vec![Method::AnchorNet, Method::Uniform],
        ranks: vec![50, 100, 150, 200, 250, 300],
        runs: 10,
        norm: Some(ErrorNorm::Two),
        seed: 8,
        timings: false,
        tess_mult: 2.0,
        ..SweepConfig::default()
    };
    let rows = run_sweep(&ds, &cfg).map_err(|e| format!("sweep: {e}"))?;
    let mut anchor: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.method == "anchornet")
        .map(|r| (r.m_requested, r.err_value))
        .collect();
    anchor.sort_by_key(|&(m, _)| m);
    let mut running_min = f64::INFINITY;
    for &(m, e) in &anchor {
        if e > 1.5 * running_min {
            return Err(format!(
                "anchor-net error {e:.3e} at rank {m} exceeds 1.5x running min {running_min:.3e}"
            ));
        }
        running_min = running_min.min(e);
    }
    let witness = rows
        .iter()
        .filter(|r| r.method == "uniform")
        .any(|r| r.min_sv < 1e3 * f64::EPSILON * r.max_sv);
    if !witness {
        return Err("no uniform run exhibited the min_sv instability witness".into());
    }
    let elapsed = start.elapsed();
    Ok(format!(
        "anchor-net monotone within 1.5x; uniform min_sv collapse witnessed ({elapsed:.2?})"
    ))
}

// 9. Stabilization behavior on the 2D synthetic dataset with the sigmoid
// kernel: pinv truncation plateaus at an eps-dependent level, and the
// unstabilized anchor-net run reaches >= 8 digits of max-norm accuracy.
fn criterion_9() -> CriterionResult {
    let start = Instant::now();
    let ds = standin_2d();
    let spec = KernelSpec::new(KernelFamily::Sigmoid, 1.0);
    let lm = anchornet::select_landmarks(&ds, 200, &AnchorNetConfig::default())
        .map_err(|e| format!("select: {e}"))?;
    let mut errs = Vec::new();
    for stab in [
        Stabilization::None,
        Stabilization::PinvEps(1e-12),
        Stabilization::PinvEps(1e-8),
    ] {
        let f = factor(&ds, &lm, &spec, stab, 0.0).map_err(|e| format!("{stab}: {e}"))?;
        let rep = approx_error(&ds, &f, &spec, ErrorNorm::Max, None, 0.0)
            .map_err(|e| format!("{stab} error: {e}"))?;
        errs.push((stab, rep.value, rep.relative));
    }
    let (_, _, rel_none) = errs[0];
    let (_, e12, _) = errs[1];
    let (_, e8, _) = errs[2];
    if e8 < e12 * (1.0 - 1e-9) {
        return Err(format!(
            "error(eps=1e-8) = {e8:.3e} < error(eps=1e-12) = {e12:.3e}"
        ));
    }
    if rel_none > 1e-8 {
        return Err(format!(
            "unstabilized relative max-norm accuracy {rel_none:.3e} has fewer than 8 digits"
        ));
    }
    let elapsed = start.elapsed();
    Ok(format!(
        "rank 200: rel err {rel_none:.1e} unstabilized; plateau {e8:.1e} (1e-8) >= {e12:.1e} (1e-12) in {elapsed:.2?}"
    ))
}

// 10. Star-discrepancy oracles.
fn criterion_10() -> CriterionResult {
    let half = DMatrix::from_row_slice(1, 1, &[0.5]);
    let est = star_discrepancy(&half, &Region::UnitCube, DiscrepancyMethod::Exact1d)
        .map_err(|e| format!("{e}"))?;
    if (est.value - 0.5).abs() > 1e-12 {
        return Err(format!("D*({{0.5}}) = {}, want 0.5", est.value));
    }
    let quarters = DMatrix::from_row_slice(2, 1, &[0.25, 0.75]);
    let est = star_discrepancy(&quarters, &Region::UnitCube, DiscrepancyMethod::Exact1d)
        .map_err(|e| format!("{e}"))?;
    if (est.value - 0.25).abs() > 1e-12 {
        return Err(format!("D*({{0.25, 0.75}}) = {}, want 0.25", est.value));
    }
    let mut prev = f64::INFINITY;
    for n in [16usize, 64, 256] {
        let ps = halton(n, 2, 1);
        let exact = star_discrepancy(&ps.points, &Region::UnitCube, DiscrepancyMethod::Exact2d)
            .map_err(|e| format!("{e}"))?;
        if exact.value >= prev {
            return Err(format!("Halton 2D D* not decreasing at N = {n}"));
        }
        let mc = star_discrepancy(
            &ps.points,
            &Region::UnitCube,
            DiscrepancyMethod::MonteCarlo {
                samples: 20_000,
                seed: 10,
            },
        )
        .map_err(|e| format!("{e}"))?;
        if !(mc.is_lower_bound && mc.value <= exact.value + 1e-12) {
            return Err(format!(
                "MC estimate {} exceeds exact {} at N = {n}",
                mc.value, exact.value
            ));
        }
        prev = exact.value;
    }
    Ok("closed-form 1D values, decreasing Halton 2D sequence, MC <= exact".into())
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("max-norm error bound suite", criterion_1),
        ("marking-error toy", criterion_2),
        ("tensor grid size bound", criterion_3),
        ("net coverage and allocation", criterion_4),
        ("exactness oracles", criterion_5),
        ("selection cost scaling", criterion_6),
        ("indefinite-kernel benchmark", criterion_7),
        ("SPSD instability benchmark", criterion_8),
        ("stabilization behavior", criterion_9),
        ("discrepancy suite", criterion_10),
    ];
    let mut failures = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg}", i + 1),
            Err(msg) => {
                println!("criterion {:>2} FAIL  {name}: {msg}", i + 1);
                failures.push(format!("criterion {} ({name}): {msg}", i + 1));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} criteria failed:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
