//! Anchor-net construction and anchor-net landmark selection.
//!
//! The net is a two-level low-discrepancy set: a tessellation `T` splits the
//! dataset into groups by l-infinity nearest tessellation point, each
//! nonempty group gets a tight bounding box, and a per-group low-discrepancy
//! set fills each box with a point budget proportional to the box volume.
//! Landmarks are then the l-infinity nearest dataset points to the anchors,
//! which keeps the overall selection cost linear in both the net size and the
//! dataset size.

use nalgebra::DMatrix;
use std::time::{Duration, Instant};

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::lowdisc::{grid_for_budget, halton_in_box, BBox, PointSet};

/// Which low-discrepancy generator fills a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Halton,
    AdaptiveGrid,
}

#[derive(Debug, Clone, Copy)]
pub struct AnchorNetConfig {
    /// Tessellation size as a multiple of the net size; clamped to [2, 20].
    pub tess_multiplier: f64,
    pub tess_generator: GeneratorKind,
    pub cell_generator: GeneratorKind,
}

impl Default for AnchorNetConfig {
    fn default() -> Self {
        AnchorNetConfig {
            tess_multiplier: 4.0,
            tess_generator: GeneratorKind::Halton,
            cell_generator: GeneratorKind::AdaptiveGrid,
        }
    }
}

/// The constructed net: anchors plus the grouping geometry behind them.
#[derive(Debug, Clone)]
pub struct AnchorNet {
    pub anchors: DMatrix<f64>,
    /// Dataset indices of each nonempty group, in tessellation order.
    pub groups: Vec<Vec<usize>>,
    pub boxes: Vec<BBox>,
    pub volumes: Vec<f64>,
    pub tessellation: DMatrix<f64>,
    pub requested_m: usize,
}

impl AnchorNet {
    /// The union of group boxes, the region the net has low discrepancy in.
    pub fn region_boxes(&self) -> &[BBox] {
        &self.boxes
    }
}

/// A set of selected landmarks. `indices` is empty for centroid-based
/// selectors whose landmarks are not dataset rows.
#[derive(Debug, Clone)]
pub struct LandmarkSet {
    pub indices: Vec<usize>,
    pub coords: DMatrix<f64>,
    pub method: String,
    pub m_requested: usize,
    pub select_time: Duration,
}

impl LandmarkSet {
    pub fn m_actual(&self) -> usize {
        self.coords.nrows()
    }

    pub fn from_indices(
        ds: &Dataset,
        indices: Vec<usize>,
        method: impl Into<String>,
        m_requested: usize,
        select_time: Duration,
    ) -> Self {
        let coords = DMatrix::from_fn(indices.len(), ds.d(), |i, j| ds.points[(indices[i], j)]);
        LandmarkSet {
            indices,
            coords,
            method: method.into(),
            m_requested,
            select_time,
        }
    }
}

/// Per-group anchor budgets: `ceil(m * w_i / sum(w))`, with weight-zero groups
/// pinned to one anchor. When every weight is zero the caller should pass
/// group cardinalities instead.
pub fn allocate_sizes(weights: &[f64], m: usize) -> Result<Vec<usize>> {
    if weights.is_empty() {
        return Err(Error::EmptyInput("allocation weights"));
    }
    assert!(m >= 1);
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Ok(vec![1; weights.len()]);
    }
    Ok(weights
        .iter()
        .map(|w| {
            if *w <= 0.0 {
                1
            } else {
                (m as f64 * w / total).ceil() as usize
            }
        })
        .collect())
}

/// Largest-remainder apportionment of exactly `m` anchors proportional to
/// `weights` (floors plus top fractional parts, ties to the lowest index).
/// Unlike the ceiling rule this never overshoots; small-weight groups can
/// receive zero.
pub fn allocate_exact(weights: &[f64], m: usize) -> Result<Vec<usize>> {
    if weights.is_empty() {
        return Err(Error::EmptyInput("allocation weights"));
    }
    let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    if total <= 0.0 {
        return Err(Error::EmptyInput("allocation weights (all zero)"));
    }
    let mut sizes: Vec<usize> = Vec::with_capacity(weights.len());
    let mut fracs: Vec<(f64, usize)> = Vec::with_capacity(weights.len());
    let mut assigned = 0usize;
    for (i, &w) in weights.iter().enumerate() {
        let share = if w > 0.0 { m as f64 * w / total } else { 0.0 };
        let base = share.floor() as usize;
        sizes.push(base);
        assigned += base;
        fracs.push((share - base as f64, i));
    }
    // stable by construction: sort by descending fraction, then lowest index
    fracs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut left = m.saturating_sub(assigned);
    for (frac, i) in fracs {
        if left == 0 {
            break;
        }
        if frac > 0.0 || weights[i] > 0.0 {
            sizes[i] += 1;
            left -= 1;
        }
    }
    Ok(sizes)
}

/// Apportion exactly `m` anchors with a hard per-group cap (a group with c
/// dataset points can contribute at most c distinct landmarks). Every group
/// gets one anchor when `m` allows; the rest is distributed proportional to
/// `weights` by largest remainder, with capped groups' excess flowing to the
/// uncapped ones. When `m` is smaller than the group count only the
/// largest-weight groups receive an anchor.
pub fn allocate_capped(weights: &[f64], caps: &[usize], m: usize) -> Result<Vec<usize>> {
    if weights.is_empty() || weights.len() != caps.len() {
        return Err(Error::EmptyInput("allocation weights"));
    }
    let g = weights.len();
    let mut sizes = vec![0usize; g];
    let mut left = m;
    if m >= g {
        for (s, &c) in sizes.iter_mut().zip(caps) {
            if c >= 1 {
                *s = 1;
                left -= 1;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..g).collect();
        order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
        for &i in order.iter().take(m) {
            if caps[i] >= 1 {
                sizes[i] = 1;
                left -= 1;
            }
        }
    }
    while left > 0 {
        let active: Vec<usize> = (0..g).filter(|&i| sizes[i] < caps[i]).collect();
        if active.is_empty() {
            break;
        }
        let mut w: Vec<f64> = active.iter().map(|&i| weights[i].max(0.0)).collect();
        if w.iter().sum::<f64>() <= 0.0 {
            // no usable weights left: spread by remaining capacity
            w = active.iter().map(|&i| (caps[i] - sizes[i]) as f64).collect();
        }
        let extra = allocate_exact(&w, left)?;
        let mut placed = 0usize;
        for (&i, &e) in active.iter().zip(&extra) {
            let take = e.min(caps[i] - sizes[i]);
            sizes[i] += take;
            placed += take;
        }
        if placed == 0 {
            break;
        }
        left -= placed;
    }
    Ok(sizes)
}

/// Index of the row of `mat` nearest to `p` in l-infinity norm, lowest index
/// on ties.
fn nearest_row_linf(mat: &DMatrix<f64>, p: &[f64]) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    let n = mat.nrows();
    let d = mat.ncols();
    let data = mat.as_slice(); // column-major
    for i in 0..n {
        let mut dist: f64 = 0.0;
        for j in 0..d {
            let diff = (data[j * n + i] - p[j]).abs();
            if diff > dist {
                dist = diff;
            }
            if dist >= best_d {
                break;
            }
        }
        if dist < best_d {
            best_d = dist;
            best = i;
        }
    }
    best
}

fn generate_in_box(kind: GeneratorKind, bbox: &BBox, budget: usize) -> PointSet {
    match kind {
        GeneratorKind::Halton => halton_in_box(budget, bbox, 1),
        GeneratorKind::AdaptiveGrid => grid_for_budget(bbox, budget),
    }
}

struct Tessellated {
    groups: Vec<Vec<usize>>,
    boxes: Vec<BBox>,
    volumes: Vec<f64>,
    tessellation: DMatrix<f64>,
}

fn tessellate(ds: &Dataset, m: usize, config: &AnchorNetConfig) -> Tessellated {
    let d = ds.d();
    let tess_mult = config.tess_multiplier.clamp(2.0, 20.0);
    let s = ((tess_mult * m as f64).round() as usize).max(1);

    let b0 = BBox::enclosing_all(&ds.points);
    let tessellation = generate_in_box(config.tess_generator, &b0, s).points;

    // l-infinity assignment of every dataset point to its tessellation cell
    let mut groups_all: Vec<Vec<usize>> = vec![Vec::new(); tessellation.nrows()];
    let mut p = vec![0.0; d];
    for i in 0..ds.n() {
        for j in 0..d {
            p[j] = ds.points[(i, j)];
        }
        groups_all[nearest_row_linf(&tessellation, &p)].push(i);
    }

    let groups: Vec<Vec<usize>> = groups_all.into_iter().filter(|g| !g.is_empty()).collect();
    let boxes: Vec<BBox> = groups
        .iter()
        .map(|g| BBox::enclosing(&ds.points, g))
        .collect();
    let volumes: Vec<f64> = boxes.iter().map(BBox::volume).collect();
    Tessellated {
        groups,
        boxes,
        volumes,
        tessellation,
    }
}

fn group_anchors(
    tess: &Tessellated,
    sizes: &[usize],
    cell_generator: GeneratorKind,
    d: usize,
) -> Vec<Vec<f64>> {
    let mut anchor_rows: Vec<Vec<f64>> = Vec::new();
    for (bx, &sz) in tess.boxes.iter().zip(sizes) {
        if sz == 0 {
            continue;
        }
        if bx.volume() <= 0.0 {
            anchor_rows.push(bx.center());
            continue;
        }
        let cell = generate_in_box(cell_generator, bx, sz);
        for i in 0..cell.len() {
            anchor_rows.push((0..d).map(|j| cell.points[(i, j)]).collect());
        }
    }
    anchor_rows
}

/// Construct the anchor net for a dataset with requested net size `m`. Every
/// nonempty group receives at least one anchor (ceiling allocation), so the
/// net can be larger than `m`.
pub fn build(ds: &Dataset, m: usize, config: &AnchorNetConfig) -> Result<AnchorNet> {
    assert!(m >= 1 && ds.n() >= 1);
    let d = ds.d();
    let tess = tessellate(ds, m, config);

    let sizes = if tess.volumes.iter().sum::<f64>() > 0.0 {
        allocate_sizes(&tess.volumes, m)?
    } else {
        let counts: Vec<f64> = tess.groups.iter().map(|g| g.len() as f64).collect();
        allocate_sizes(&counts, m)?
    };

    let anchor_rows = group_anchors(&tess, &sizes, config.cell_generator, d);
    let anchors = DMatrix::from_fn(anchor_rows.len(), d, |i, j| anchor_rows[i][j]);

    Ok(AnchorNet {
        anchors,
        groups: tess.groups,
        boxes: tess.boxes,
        volumes: tess.volumes,
        tessellation: tess.tessellation,
        requested_m: m,
    })
}

/// Select landmark points by snapping each anchor to its l-infinity nearest
/// *not yet selected* dataset point inside the anchor's own group.
///
/// Unlike [`build`], the per-group budgets here apportion exactly `m`
/// (the ceiling rule would overshoot by up to the number of nonempty groups)
/// and are capped at the group cardinality, so no budget is wasted on anchors
/// that would collapse onto the same point. Any shortfall inside a group
/// (the tensor grid can undershoot its budget) is filled by farthest-point
/// picks over that group's remaining rows, so `m_actual == m` always holds.
pub fn select_landmarks(ds: &Dataset, m: usize, config: &AnchorNetConfig) -> Result<LandmarkSet> {
    if m > ds.n() {
        return Err(Error::CountExceedsData {
            requested: m,
            available: ds.n(),
        });
    }
    let start = Instant::now();
    let d = ds.d();
    let tess = tessellate(ds, m, config);
    let caps: Vec<usize> = tess.groups.iter().map(Vec::len).collect();
    // weight groups by cardinality rather than box volume: weighting by
    // volume spends the budget on large sparse boxes around outliers, while
    // dense clusters sitting in small boxes are starved of anchors
    let counts: Vec<f64> = caps.iter().map(|&c| c as f64).collect();
    let sizes = allocate_capped(&counts, &caps, m)?;

    let linf = |row: usize, y: &[f64]| -> f64 {
        (0..d).fold(0.0f64, |acc, j| acc.max((ds.points[(row, j)] - y[j]).abs()))
    };
    let mut indices = Vec::with_capacity(m);
    for ((g, bx), &sz) in tess.groups.iter().zip(&tess.boxes).zip(&sizes) {
        if sz == 0 {
            continue;
        }
        // a lone anchor goes to the group's data centroid: the box center can
        // sit far from the mass when a few strays inflate the box
        let anchors: Vec<Vec<f64>> = if sz == 1 || bx.volume() <= 0.0 {
            let mut c = vec![0.0; d];
            for &row in g.iter() {
                for (j, v) in c.iter_mut().enumerate() {
                    *v += ds.points[(row, j)];
                }
            }
            for v in &mut c {
                *v /= g.len() as f64;
            }
            vec![c]
        } else {
            let cell = generate_in_box(config.cell_generator, bx, sz);
            (0..cell.len())
                .map(|i| (0..d).map(|j| cell.points[(i, j)]).collect())
                .collect()
        };
        let mut used = vec![false; g.len()];
        let mut picked: Vec<usize> = Vec::with_capacity(sz);
        for y in anchors.iter().take(sz) {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for (k, &row) in g.iter().enumerate() {
                if used[k] {
                    continue;
                }
                let dist = linf(row, y);
                if dist < best_d {
                    best_d = dist;
                    best = k;
                }
            }
            used[best] = true;
            picked.push(g[best]);
        }
        // grid undershoot / degenerate box: farthest-point fill within the group
        while picked.len() < sz {
            let mut best = usize::MAX;
            let mut best_d = -1.0f64;
            for (k, &row) in g.iter().enumerate() {
                if used[k] {
                    continue;
                }
                let mut p = vec![0.0; d];
                for (j, v) in p.iter_mut().enumerate() {
                    *v = ds.points[(row, j)];
                }
                let dist = picked
                    .iter()
                    .map(|&q| linf(q, &p))
                    .fold(f64::INFINITY, f64::min);
                if dist > best_d {
                    best_d = dist;
                    best = k;
                }
            }
            used[best] = true;
            picked.push(g[best]);
        }
        indices.extend(picked);
    }
    Ok(LandmarkSet::from_indices(
        ds,
        indices,
        "anchornet",
        m,
        start.elapsed(),
    ))
}
