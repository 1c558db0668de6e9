//! Low-discrepancy point generation and star-discrepancy measurement.
//!
//! Provides Halton sequences, adaptive tensor grids whose per-dimension node
//! counts share a total budget `i_1 + ... + i_d = p + d`, and the star
//! discrepancy over the unit cube or over a union of boxes (the generalized
//! form). Exact discrepancy is available for d <= 2; higher dimensions use a
//! seeded Monte-Carlo corner search that yields a lower bound.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// First 50 primes, used as Halton bases.
const PRIMES: [u64; 50] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229,
];

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`. Zero-extent sides are
/// allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct BBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b), "lo must be <= hi");
        BBox { lo, hi }
    }

    pub fn unit(d: usize) -> Self {
        BBox::new(vec![0.0; d], vec![1.0; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn sides(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).collect()
    }

    pub fn volume(&self) -> f64 {
        self.sides().iter().product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    /// Smallest box enclosing the given rows of a point matrix.
    pub fn enclosing(points: &DMatrix<f64>, rows: &[usize]) -> Self {
        assert!(!rows.is_empty());
        let d = points.ncols();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in rows {
            for j in 0..d {
                let v = points[(i, j)];
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        BBox { lo, hi }
    }

    pub fn enclosing_all(points: &DMatrix<f64>) -> Self {
        let rows: Vec<usize> = (0..points.nrows()).collect();
        BBox::enclosing(points, &rows)
    }

    pub fn intersect(&self, other: &BBox) -> Option<BBox> {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let l = self.lo[j].max(other.lo[j]);
            let h = self.hi[j].min(other.hi[j]);
            if l > h {
                return None;
            }
            lo.push(l);
            hi.push(h);
        }
        Some(BBox { lo, hi })
    }

    /// Volume of the intersection with the anchored half-open box `[0, a)`.
    fn anchored_volume(&self, a: &[f64]) -> f64 {
        let mut v = 1.0;
        for j in 0..self.dim() {
            let h = self.hi[j].min(a[j]);
            let l = self.lo[j].max(0.0);
            if h <= l {
                return 0.0;
            }
            v *= h - l;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorParams {
    Halton { start_index: u64, bases: Vec<u64> },
    AdaptiveGrid { p: usize, composition: Vec<usize> },
}

/// A generated point set with its provenance.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub points: DMatrix<f64>,
    pub generator: String,
    pub params: GeneratorParams,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let b = base as f64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// First `count` Halton points in the unit cube, starting at `start_index`
/// (1-based, so `start_index = 1` gives the head of the sequence).
pub fn halton(count: usize, dim: usize, start_index: u64) -> PointSet {
    assert!(dim >= 1 && dim <= PRIMES.len(), "dim must be in 1..=50");
    assert!(start_index >= 1);
    let bases: Vec<u64> = PRIMES[..dim].to_vec();
    let points = DMatrix::from_fn(count, dim, |i, j| {
        radical_inverse(start_index + i as u64, bases[j])
    });
    PointSet {
        points,
        generator: "halton".into(),
        params: GeneratorParams::Halton { start_index, bases },
    }
}

/// Halton points affinely mapped into `bbox`.
pub fn halton_in_box(count: usize, bbox: &BBox, start_index: u64) -> PointSet {
    let mut ps = halton(count, bbox.dim(), start_index);
    for i in 0..count {
        for j in 0..bbox.dim() {
            ps.points[(i, j)] = bbox.lo[j] + ps.points[(i, j)] * (bbox.hi[j] - bbox.lo[j]);
        }
    }
    ps
}

/// Split the node budget `p + d` across dimensions: every dimension gets one
/// node, the surplus `p` is shared proportionally to box side lengths with
/// largest-remainder rounding. Ties go to the lowest dimension index and
/// zero-extent dimensions always keep exactly one node.
pub fn compose_budget(bbox: &BBox, p: usize) -> Vec<usize> {
    let d = bbox.dim();
    let sides = bbox.sides();
    let total: f64 = sides.iter().sum();
    let mut counts = vec![1usize; d];
    if p == 0 || total <= 0.0 {
        // all sides zero-extent: nothing to refine, keep a single node per dim
        return counts;
    }
    let quotas: Vec<f64> = sides.iter().map(|s| p as f64 * s / total).collect();
    let mut assigned = 0usize;
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(d);
    for j in 0..d {
        let f = quotas[j].floor() as usize;
        counts[j] += f;
        assigned += f;
        if sides[j] > 0.0 {
            remainders.push((j, quotas[j] - quotas[j].floor()));
        }
    }
    let mut leftover = p - assigned;
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for (j, _) in remainders {
        if leftover == 0 {
            break;
        }
        counts[j] += 1;
        leftover -= 1;
    }
    counts
}

/// Tensor-product grid over `bbox` with the composition from
/// [`compose_budget`]; nodes sit at cell midpoints along each dimension.
pub fn adaptive_grid(bbox: &BBox, p: usize) -> PointSet {
    let d = bbox.dim();
    let counts = compose_budget(bbox, p);
    let total: usize = counts.iter().product();
    let mut points = DMatrix::zeros(total, d);
    let mut idx = vec![0usize; d];
    for row in 0..total {
        for j in 0..d {
            let i = idx[j];
            let frac = (2 * i + 1) as f64 / (2 * counts[j]) as f64;
            points[(row, j)] = bbox.lo[j] + frac * (bbox.hi[j] - bbox.lo[j]);
        }
        // advance mixed-radix counter, last dimension fastest
        for j in (0..d).rev() {
            idx[j] += 1;
            if idx[j] < counts[j] {
                break;
            }
            idx[j] = 0;
        }
    }
    PointSet {
        points,
        generator: "adaptive-grid".into(),
        params: GeneratorParams::AdaptiveGrid { p, composition: counts },
    }
}

/// Largest adaptive grid whose size does not exceed `max_count`. The actual
/// size may undershoot the budget; callers read it off the returned set.
pub fn grid_for_budget(bbox: &BBox, max_count: usize) -> PointSet {
    assert!(max_count >= 1);
    if bbox.sides().iter().all(|s| *s <= 0.0) {
        return adaptive_grid(bbox, 0);
    }
    let mut best_p = 0usize;
    let mut p = 0usize;
    loop {
        let size: usize = compose_budget(bbox, p).iter().product();
        if size > max_count {
            break;
        }
        best_p = p;
        p += 1;
        if p > 512 {
            break; // budget far beyond any sane grid; bail out
        }
    }
    adaptive_grid(bbox, best_p)
}

/// Region a point set is measured against.
#[derive(Debug, Clone)]
pub enum Region {
    UnitCube,
    BoxUnion(Vec<BBox>),
}

#[derive(Debug, Clone, Copy)]
pub enum DiscrepancyMethod {
    Exact1d,
    Exact2d,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct DiscrepancyEstimate {
    pub value: f64,
    /// Monte-Carlo corner search maximizes over a sample of boxes only, so it
    /// can only under-estimate the supremum.
    pub is_lower_bound: bool,
}

const MAX_EXACT_BOXES: usize = 20;

/// Evaluates `lambda(Omega intersect [0,a)) / lambda(Omega)` either exactly by
/// inclusion-exclusion (over subsets of boxes with nonempty intersection) or
/// by a fixed seeded hit sample when the union is too large.
enum UnionMeasure {
    Cube,
    InclusionExclusion { terms: Vec<(f64, BBox)>, total: f64 },
    HitSample { hits: Vec<Vec<f64>> },
}

impl UnionMeasure {
    fn build(region: &Region, mc_seed: Option<u64>) -> Result<UnionMeasure> {
        match region {
            Region::UnitCube => Ok(UnionMeasure::Cube),
            Region::BoxUnion(boxes) => {
                if boxes.is_empty() {
                    return Err(Error::EmptyInput("box union"));
                }
                if boxes.len() <= MAX_EXACT_BOXES {
                    Ok(Self::inclusion_exclusion(boxes))
                } else if let Some(seed) = mc_seed {
                    Ok(Self::hit_sample(boxes, seed))
                } else {
                    Err(Error::TooManyBoxes {
                        max: MAX_EXACT_BOXES,
                        got: boxes.len(),
                    })
                }
            }
        }
    }

    fn inclusion_exclusion(boxes: &[BBox]) -> UnionMeasure {
        // enumerate only subsets whose common intersection is nonempty;
        // extending a dead subset stays dead, so grow them incrementally
        let mut frontier: Vec<(usize, f64, BBox)> = boxes
            .iter()
            .enumerate()
            .map(|(i, b)| (i, 1.0, b.clone()))
            .collect();
        let mut terms: Vec<(f64, BBox)> = Vec::new();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (last, sign, cur) in &frontier {
                terms.push((*sign, cur.clone()));
                for (j, b) in boxes.iter().enumerate().skip(last + 1) {
                    if let Some(inter) = cur.intersect(b) {
                        next.push((j, -sign, inter));
                    }
                }
            }
            frontier = next;
        }
        let total: f64 = terms.iter().map(|(s, b)| s * b.volume()).sum();
        UnionMeasure::InclusionExclusion { terms, total }
    }

    fn hit_sample(boxes: &[BBox], seed: u64) -> UnionMeasure {
        let d = boxes[0].dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for b in boxes {
            for j in 0..d {
                lo[j] = lo[j].min(b.lo[j]);
                hi[j] = hi[j].max(b.hi[j]);
            }
        }
        let mut rng = rng_from_seed(seed);
        let mut hits = Vec::new();
        let samples = 4000 * d.max(2);
        for _ in 0..samples {
            let p: Vec<f64> = (0..d)
                .map(|j| {
                    if hi[j] > lo[j] {
                        rng.gen_range(lo[j]..hi[j])
                    } else {
                        lo[j]
                    }
                })
                .collect();
            if boxes.iter().any(|b| b.contains(&p)) {
                hits.push(p);
            }
        }
        UnionMeasure::HitSample { hits }
    }

    fn fraction(&self, a: &[f64]) -> f64 {
        match self {
            UnionMeasure::Cube => a.iter().map(|x| x.clamp(0.0, 1.0)).product(),
            UnionMeasure::InclusionExclusion { terms, total } => {
                if *total <= 0.0 {
                    return 0.0;
                }
                let v: f64 = terms.iter().map(|(s, b)| s * b.anchored_volume(a)).sum();
                (v / total).clamp(0.0, 1.0)
            }
            UnionMeasure::HitSample { hits } => {
                if hits.is_empty() {
                    return 0.0;
                }
                let inside = hits
                    .iter()
                    .filter(|p| p.iter().zip(a).all(|(x, ai)| x < ai))
                    .count();
                inside as f64 / hits.len() as f64
            }
        }
    }

    /// Upper corner of the measured domain, used to bound candidate boxes.
    fn domain_hi(&self, d: usize) -> Vec<f64> {
        match self {
            UnionMeasure::Cube => vec![1.0; d],
            UnionMeasure::InclusionExclusion { terms, .. } => {
                let mut hi = vec![f64::NEG_INFINITY; d];
                for (sign, b) in terms {
                    if *sign > 0.0 {
                        for j in 0..d {
                            hi[j] = hi[j].max(b.hi[j]);
                        }
                    }
                }
                hi
            }
            UnionMeasure::HitSample { hits } => {
                let mut hi = vec![f64::NEG_INFINITY; d];
                for p in hits {
                    for j in 0..d {
                        hi[j] = hi[j].max(p[j]);
                    }
                }
                hi
            }
        }
    }
}

/// Star discrepancy of `points` relative to `region`.
///
/// The exact methods enumerate the critical anchored boxes whose upper corners
/// sit at point coordinates (evaluating both one-sided limits); they cover
/// d = 1 and d = 2. `MonteCarlo` evaluates the deviation at sampled corners
/// and reports the maximum, which lower-bounds the supremum.
pub fn star_discrepancy(
    points: &DMatrix<f64>,
    region: &Region,
    method: DiscrepancyMethod,
) -> Result<DiscrepancyEstimate> {
    let n = points.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("point set"));
    }
    let d = points.ncols();
    match method {
        DiscrepancyMethod::Exact1d | DiscrepancyMethod::Exact2d => {
            let want = if matches!(method, DiscrepancyMethod::Exact1d) { 1 } else { 2 };
            if d != want || d > 2 {
                return Err(Error::ExactDiscrepancyDim(d));
            }
            let measure = UnionMeasure::build(region, None)?;
            Ok(DiscrepancyEstimate {
                value: exact_discrepancy(points, &measure),
                is_lower_bound: false,
            })
        }
        DiscrepancyMethod::MonteCarlo { samples, seed } => {
            let measure = UnionMeasure::build(region, Some(derive_seed(seed, &[0xB0])))?;
            Ok(DiscrepancyEstimate {
                value: monte_carlo_discrepancy(points, &measure, samples, seed),
                is_lower_bound: true,
            })
        }
    }
}

fn candidate_coords(points: &DMatrix<f64>, measure: &UnionMeasure, j: usize) -> Vec<f64> {
    let d = points.ncols();
    let mut c: Vec<f64> = (0..points.nrows()).map(|i| points[(i, j)]).collect();
    if let UnionMeasure::InclusionExclusion { terms, .. } = measure {
        for (_, b) in terms {
            c.push(b.lo[j]);
            c.push(b.hi[j]);
        }
    }
    c.push(measure.domain_hi(d)[j]);
    c.retain(|v| v.is_finite() && *v >= 0.0);
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

fn exact_discrepancy(points: &DMatrix<f64>, measure: &UnionMeasure) -> f64 {
    let n = points.nrows();
    let nf = n as f64;
    let d = points.ncols();
    let xs = candidate_coords(points, measure, 0);
    let mut best: f64 = 0.0;
    if d == 1 {
        let mut coords: Vec<f64> = (0..n).map(|i| points[(i, 0)]).collect();
        coords.sort_by(f64::total_cmp);
        for &a in &xs {
            let strict = coords.partition_point(|v| *v < a) as f64;
            let closed = coords.partition_point(|v| *v <= a) as f64;
            let vol = measure.fraction(&[a]);
            best = best.max((closed / nf - vol).max(vol - strict / nf));
        }
        return best;
    }
    let ys = candidate_coords(points, measure, 1);
    // points sorted by x so prefix scans give the strict/closed y-multisets
    let mut pts: Vec<(f64, f64)> = (0..n).map(|i| (points[(i, 0)], points[(i, 1)])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &ax in &xs {
        let strict_end = pts.partition_point(|p| p.0 < ax);
        let closed_end = pts.partition_point(|p| p.0 <= ax);
        let mut ys_strict: Vec<f64> = pts[..strict_end].iter().map(|p| p.1).collect();
        let mut ys_closed: Vec<f64> = pts[..closed_end].iter().map(|p| p.1).collect();
        ys_strict.sort_by(f64::total_cmp);
        ys_closed.sort_by(f64::total_cmp);
        for &ay in &ys {
            let strict = ys_strict.partition_point(|v| *v < ay) as f64;
            let closed = ys_closed.partition_point(|v| *v <= ay) as f64;
            let vol = measure.fraction(&[ax, ay]);
            best = best.max((closed / nf - vol).max(vol - strict / nf));
        }
    }
    best
}

fn monte_carlo_discrepancy(
    points: &DMatrix<f64>,
    measure: &UnionMeasure,
    samples: usize,
    seed: u64,
) -> f64 {
    let n = points.nrows();
    let nf = n as f64;
    let d = points.ncols();
    let hi = measure.domain_hi(d);
    let mut rng = rng_from_seed(seed);
    let mut best: f64 = 0.0;
    let mut a = vec![0.0; d];
    for s in 0..samples {
        if s < n {
            // anchor part of the sample at the data points themselves: the
            // supremum is attained at a corner touching a point coordinate
            for j in 0..d {
                a[j] = points[(s, j)];
            }
        } else {
            for j in 0..d {
                a[j] = if hi[j] > 0.0 { rng.gen_range(0.0..=hi[j]) } else { 0.0 };
            }
        }
        let mut strict = 0usize;
        let mut closed = 0usize;
        for i in 0..n {
            let mut st = true;
            let mut cl = true;
            for j in 0..d {
                let v = points[(i, j)];
                st &= v < a[j];
                cl &= v <= a[j];
            }
            strict += st as usize;
            closed += cl as usize;
        }
        let vol = measure.fraction(&a);
        best = best.max((closed as f64 / nf - vol).max(vol - strict as f64 / nf));
    }
    best
}
