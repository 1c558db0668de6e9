//! Dataset loading, standardization, subsampling and synthesis.

use nalgebra::DMatrix;
use rand::Rng;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, sample_without_replacement};

/// A point cloud: `n` points in `d` dimensions, one point per row.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: DMatrix<f64>,
    pub standardized: bool,
    pub source: String,
}

impl Dataset {
    pub fn new(points: DMatrix<f64>, source: impl Into<String>) -> Self {
        Dataset {
            points,
            standardized: false,
            source: source.into(),
        }
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn d(&self) -> usize {
        self.points.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }
}

/// Geometric summary used for bandwidth selection.
#[derive(Debug, Clone)]
pub struct DataStats {
    pub center: Vec<f64>,
    pub radius: f64,
    pub half_radius: f64,
}

/// Load a numeric CSV file. `column_selection` keeps only the listed columns
/// (in the given order); `skip_header` drops the first line.
pub fn load_csv(
    path: impl AsRef<Path>,
    column_selection: Option<&[usize]>,
    skip_header: bool,
) -> Result<Dataset> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(skip_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Io {
            path: path_str.clone(),
            source: std::io::Error::other(e.to_string()),
        })?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (ri, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::CsvParse {
            row: ri,
            col: 0,
            msg: e.to_string(),
        })?;
        if width == 0 {
            width = record.len();
        } else if record.len() != width {
            return Err(Error::RaggedRow {
                row: ri,
                expected: width,
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(width);
        for (ci, field) in record.iter().enumerate() {
            if let Some(cols) = column_selection {
                if !cols.contains(&ci) {
                    row.push(f64::NAN); // placeholder, filtered below
                    continue;
                }
            }
            let v: f64 = field.trim().parse().map_err(|_| Error::CsvParse {
                row: ri,
                col: ci,
                msg: format!("cannot parse {field:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: ri,
                    col: ci,
                    value: field.trim().to_string(),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyCsv { path: path_str });
    }

    let selected: Vec<usize> = match column_selection {
        Some(cols) => {
            for &c in cols {
                if c >= width {
                    return Err(Error::IndexOutOfRange { index: c, len: width });
                }
            }
            cols.to_vec()
        }
        None => (0..width).collect(),
    };
    let n = rows.len();
    let d = selected.len();
    let points = DMatrix::from_fn(n, d, |i, j| rows[i][selected[j]]);
    Ok(Dataset::new(points, path_str))
}

/// Shift each coordinate to mean 0 and scale to unit population standard
/// deviation. Constant coordinates are centered and left unscaled. Uses the
/// population (divide-by-n) standard deviation, so small sets hit unit
/// variance exactly; the source material does not fix this convention.
pub fn standardize(ds: &Dataset) -> Dataset {
    let n = ds.n();
    let d = ds.d();
    let mut points = ds.points.clone();
    for j in 0..d {
        let mean = points.column(j).sum() / n as f64;
        let mut var = 0.0;
        for i in 0..n {
            let c = points[(i, j)] - mean;
            var += c * c;
        }
        var /= n as f64;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        for i in 0..n {
            points[(i, j)] = (points[(i, j)] - mean) / scale;
        }
    }
    Dataset {
        points,
        standardized: true,
        source: ds.source.clone(),
    }
}

/// Coordinate-wise mean, max distance to it, and half that distance.
pub fn stats(ds: &Dataset) -> DataStats {
    let n = ds.n();
    let d = ds.d();
    let center: Vec<f64> = (0..d)
        .map(|j| ds.points.column(j).sum() / n as f64)
        .collect();
    let mut radius: f64 = 0.0;
    for i in 0..n {
        let mut dist2 = 0.0;
        for j in 0..d {
            let c = ds.points[(i, j)] - center[j];
            dist2 += c * c;
        }
        radius = radius.max(dist2.sqrt());
    }
    DataStats {
        center,
        radius,
        half_radius: radius / 2.0,
    }
}

/// Draw `k` distinct rows without replacement, reproducibly per seed.
pub fn subsample(ds: &Dataset, k: usize, seed: u64) -> Result<Dataset> {
    if k > ds.n() {
        return Err(Error::CountExceedsData {
            requested: k,
            available: ds.n(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let idx = sample_without_replacement(&mut rng, ds.n(), k);
    let points = DMatrix::from_fn(k, ds.d(), |i, j| ds.points[(idx[i], j)]);
    Ok(Dataset {
        points,
        standardized: ds.standardized,
        source: format!("{}[subsample:{k}]", ds.source),
    })
}

/// One cluster of a synthetic dataset: points drawn uniformly from the box
/// `center +- spread` (per coordinate).
#[derive(Debug, Clone)]
pub struct ClusterSpec {
    pub center: Vec<f64>,
    pub spread: f64,
    pub count: usize,
}

/// Generate a clustered synthetic dataset, deterministic per seed.
pub fn synth_clusters(spec: &[ClusterSpec], seed: u64) -> Result<Dataset> {
    if spec.is_empty() {
        return Err(Error::EmptyInput("cluster spec"));
    }
    let d = spec[0].center.len();
    for c in spec {
        if c.center.len() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: c.center.len(),
            });
        }
    }
    let n: usize = spec.iter().map(|c| c.count).sum();
    let mut rng = rng_from_seed(seed);
    let mut points = DMatrix::zeros(n, d);
    let mut row = 0;
    for c in spec {
        for _ in 0..c.count {
            for j in 0..d {
                let off = if c.spread > 0.0 {
                    rng.gen_range(-c.spread..=c.spread)
                } else {
                    0.0
                };
                points[(row, j)] = c.center[j] + off;
            }
            row += 1;
        }
    }
    Ok(Dataset::new(points, format!("synth[{}]", spec.len())))
}
