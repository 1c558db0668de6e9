//! Benchmark sweeps: method × rank × run grids over one dataset/kernel,
//! with deterministic seeding, per-phase timing, and CSV export.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use crate::anchornet::{self, AnchorNetConfig};
use crate::dataio::{stats, Dataset};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::nystrom::{
    self, dense_target, error_norm_dense, target_norm_dense, ErrorNorm, NystromFactors,
    Stabilization, DENSE_GUARD,
};
use crate::rng::derive_seed;
use crate::selectors::{self, SelectorConfig};

/// How the kernel bandwidth is derived from the dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaRule {
    Absolute(f64),
    HalfRadius,
    FractionOfRadius(f64),
}

impl FromStr for SigmaRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "half-radius" {
            return Ok(SigmaRule::HalfRadius);
        }
        if let Some(f) = s.strip_prefix("frac:") {
            let f: f64 = f
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad sigma fraction {s:?}")))?;
            return Ok(SigmaRule::FractionOfRadius(f));
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad sigma {s:?}")))?;
        Ok(SigmaRule::Absolute(v))
    }
}

/// Resolve the bandwidth for a dataset; errors on a nonpositive result.
pub fn resolve_sigma(rule: SigmaRule, ds: &Dataset) -> Result<f64> {
    let sigma = match rule {
        SigmaRule::Absolute(v) => v,
        SigmaRule::HalfRadius => stats(ds).half_radius,
        SigmaRule::FractionOfRadius(f) => f * stats(ds).radius,
    };
    // rejects NaN as well as non-positive values
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::NonPositiveSigma(sigma));
    }
    Ok(sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    AnchorNet,
    Uniform,
    Kmeans,
    Fps,
    Rls,
    Cholesky,
}

impl Method {
    /// Deterministic methods run once per rank; stochastic ones `runs` times.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, Method::AnchorNet | Method::Fps | Method::Cholesky)
    }

    /// Methods that require an SPSD kernel family.
    pub fn needs_spsd(&self) -> bool {
        matches!(self, Method::Rls | Method::Cholesky)
    }

    /// Stable id used for per-cell seed derivation.
    fn id(&self) -> u64 {
        match self {
            Method::AnchorNet => 0,
            Method::Uniform => 1,
            Method::Kmeans => 2,
            Method::Fps => 3,
            Method::Rls => 4,
            Method::Cholesky => 5,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::AnchorNet => "anchornet",
            Method::Uniform => "uniform",
            Method::Kmeans => "kmeans",
            Method::Fps => "fps",
            Method::Rls => "rls",
            Method::Cholesky => "cholesky",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anchornet" => Ok(Method::AnchorNet),
            "uniform" => Ok(Method::Uniform),
            "kmeans" => Ok(Method::Kmeans),
            "fps" => Ok(Method::Fps),
            "rls" => Ok(Method::Rls),
            "cholesky" => Ok(Method::Cholesky),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub kernel: KernelFamily,
    pub sigma: SigmaRule,
    pub methods: Vec<Method>,
    pub ranks: Vec<usize>,
    /// Repetitions per stochastic method (default 10).
    pub runs: usize,
    pub stabilization: Stabilization,
    pub beta: f64,
    /// None picks the default rule: two-norm dense for n ≤ 5000, otherwise
    /// Frobenius over a seeded 10000-point subset.
    pub norm: Option<ErrorNorm>,
    /// Explicit evaluation-subset size; overrides the default rule.
    pub eval_sample: Option<usize>,
    pub seed: u64,
    pub tess_mult: f64,
    /// When false, the timing columns are written as zero so that reruns of
    /// the same config produce byte-identical CSV output.
    pub timings: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            kernel: KernelFamily::Gaussian,
            sigma: SigmaRule::HalfRadius,
            methods: vec![Method::AnchorNet, Method::Uniform],
            ranks: vec![50, 100],
            runs: 10,
            stabilization: Stabilization::None,
            beta: 0.0,
            norm: None,
            eval_sample: None,
            seed: 0,
            tess_mult: 4.0,
            timings: true,
        }
    }
}

/// One output row per (method, rank, run) cell.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub method: String,
    pub kernel: String,
    pub sigma: f64,
    pub m_requested: usize,
    pub m_actual: usize,
    pub run: usize,
    pub seed: u64,
    pub err_value: f64,
    /// Norm name, or `skipped: <reason>` for incompatible cells.
    pub err_norm_kind: String,
    pub relative_err: f64,
    pub t_select_ms: f64,
    pub t_factor_ms: f64,
    pub t_eval_ms: f64,
    pub min_sv: f64,
    pub max_sv: f64,
    pub pinv_norm: f64,
}

pub const CSV_HEADER: [&str; 16] = [
    "method",
    "kernel",
    "sigma",
    "m_requested",
    "m_actual",
    "run",
    "seed",
    "err_value",
    "err_norm_kind",
    "relative_err",
    "t_select_ms",
    "t_factor_ms",
    "t_eval_ms",
    "min_sv",
    "max_sv",
    "pinv_norm",
];

fn ms(d: Duration, timings: bool) -> f64 {
    if timings {
        d.as_secs_f64() * 1e3
    } else {
        0.0
    }
}

fn validate(cfg: &SweepConfig) -> Result<()> {
    if cfg.ranks.is_empty() {
        return Err(Error::InvalidConfig("empty rank list".into()));
    }
    if !cfg.ranks.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidConfig(
            "ranks must be strictly increasing".into(),
        ));
    }
    if cfg.runs == 0 {
        return Err(Error::InvalidConfig("runs must be >= 1".into()));
    }
    if cfg.methods.is_empty() {
        return Err(Error::InvalidConfig("empty method list".into()));
    }
    Ok(())
}

struct EvalPlan {
    norm: ErrorNorm,
    /// Sorted evaluation indices.
    idx: Vec<usize>,
    /// Dense target and its norm, when the subset fits the dense guard.
    dense: Option<(nalgebra::DMatrix<f64>, f64)>,
}

fn plan_eval(ds: &Dataset, cfg: &SweepConfig, spec: &KernelSpec) -> Result<EvalPlan> {
    let sample = match cfg.eval_sample {
        Some(s) => Some(s.min(ds.n())),
        None if ds.n() > DENSE_GUARD => Some(10_000.min(ds.n())),
        None => None,
    };
    let norm = match cfg.norm {
        Some(n) => n,
        None => {
            if sample.map_or(ds.n(), |s| s) <= DENSE_GUARD {
                ErrorNorm::Two
            } else {
                ErrorNorm::Fro
            }
        }
    };
    let idx: Vec<usize> = match sample {
        Some(s) if s < ds.n() => {
            let mut rng = crate::rng::rng_from_seed(derive_seed(cfg.seed, &[u64::MAX]));
            let mut v = crate::rng::sample_without_replacement(&mut rng, ds.n(), s);
            v.sort_unstable();
            v
        }
        _ => (0..ds.n()).collect(),
    };
    if norm == ErrorNorm::Two && idx.len() > DENSE_GUARD {
        return Err(Error::OverGuard {
            n: idx.len(),
            guard: DENSE_GUARD,
        });
    }
    let dense = if idx.len() <= DENSE_GUARD {
        let k = dense_target(ds, spec, &idx, cfg.beta)?;
        let norm_val = target_norm_dense(&k, norm);
        Some((k, norm_val))
    } else {
        None
    };
    Ok(EvalPlan { norm, idx, dense })
}

fn skip_row(cfg: &SweepConfig, sigma: f64, method: Method, rank: usize, reason: String) -> ResultRow {
    ResultRow {
        method: method.to_string(),
        kernel: cfg.kernel.to_string(),
        sigma,
        m_requested: rank,
        m_actual: 0,
        run: 0,
        seed: 0,
        err_value: f64::NAN,
        err_norm_kind: format!("skipped: {reason}"),
        relative_err: f64::NAN,
        t_select_ms: 0.0,
        t_factor_ms: 0.0,
        t_eval_ms: 0.0,
        min_sv: f64::NAN,
        max_sv: f64::NAN,
        pinv_norm: f64::NAN,
    }
}

/// Run the full method × rank × run grid. Deterministic methods produce one
/// row per rank; stochastic methods produce `runs` rows with seeds derived
/// from the master seed. Incompatible (method, kernel) cells yield a skip row
/// instead of failing the sweep.
pub fn run_sweep(ds: &Dataset, cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    validate(cfg)?;
    let sigma = resolve_sigma(cfg.sigma, ds)?;
    let spec = KernelSpec::new(cfg.kernel, sigma);
    let plan = plan_eval(ds, cfg, &spec)?;
    let sel_cfg = SelectorConfig::default();
    let net_cfg = AnchorNetConfig {
        tess_multiplier: cfg.tess_mult,
        ..AnchorNetConfig::default()
    };

    let mut rows = Vec::new();
    for &method in &cfg.methods {
        for &rank in &cfg.ranks {
            if method.needs_spsd() && !cfg.kernel.is_spsd() {
                rows.push(skip_row(
                    cfg,
                    sigma,
                    method,
                    rank,
                    format!("{method} requires an SPSD kernel, got {}", cfg.kernel),
                ));
                continue;
            }
            let runs = if method.is_deterministic() { 1 } else { cfg.runs };
            for run in 0..runs {
                let cell_seed = derive_seed(cfg.seed, &[method.id(), rank as u64, run as u64]);
                match run_cell(ds, cfg, &spec, &plan, &net_cfg, &sel_cfg, method, rank, cell_seed) {
                    Ok(mut row) => {
                        row.sigma = sigma;
                        row.run = run;
                        rows.push(row);
                    }
                    Err(e) => {
                        rows.push(skip_row(cfg, sigma, method, rank, e.to_string()));
                        break;
                    }
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        (&a.method, a.m_requested, a.run).cmp(&(&b.method, b.m_requested, b.run))
    });
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    ds: &Dataset,
    cfg: &SweepConfig,
    spec: &KernelSpec,
    plan: &EvalPlan,
    net_cfg: &AnchorNetConfig,
    sel_cfg: &SelectorConfig,
    method: Method,
    rank: usize,
    seed: u64,
) -> Result<ResultRow> {
    let factors: NystromFactors;
    let m_actual;
    match method {
        Method::Cholesky => {
            factors = nystrom::pivoted_cholesky(ds, spec, rank, cfg.beta)?;
            m_actual = factors.rank();
        }
        _ => {
            let lm = match method {
                Method::AnchorNet => anchornet::select_landmarks(ds, rank, net_cfg)?,
                Method::Uniform => selectors::uniform(ds, rank, seed)?,
                Method::Kmeans => selectors::kmeans(ds, rank, sel_cfg.kmeans_iters, seed)?,
                Method::Fps => selectors::fps(ds, rank, seed)?,
                Method::Rls => selectors::rls_exact(ds, spec, sel_cfg.rls_gamma, rank, seed)?,
                Method::Cholesky => unreachable!(),
            };
            m_actual = lm.m_actual();
            factors = nystrom::factor(ds, &lm, spec, cfg.stabilization, cfg.beta)?;
        }
    }

    let t_eval_start = std::time::Instant::now();
    let (err_value, reference) = match &plan.dense {
        Some((k_tgt, ref_norm)) => (
            error_norm_dense(k_tgt, &plan.idx, &factors, plan.norm),
            *ref_norm,
        ),
        None => {
            let rep = nystrom::approx_error(
                ds,
                &factors,
                spec,
                plan.norm,
                Some((plan.idx.len(), derive_seed(cfg.seed, &[u64::MAX]))),
                cfg.beta,
            )?;
            (rep.value, rep.value / rep.relative)
        }
    };
    let t_eval = t_eval_start.elapsed();

    Ok(ResultRow {
        method: method.to_string(),
        kernel: cfg.kernel.to_string(),
        sigma: spec.sigma,
        m_requested: rank,
        m_actual,
        run: 0,
        seed,
        err_value,
        err_norm_kind: plan.norm.to_string(),
        relative_err: if reference > 0.0 {
            err_value / reference
        } else {
            f64::NAN
        },
        t_select_ms: ms(factors.select_time, cfg.timings),
        t_factor_ms: ms(factors.factor_time, cfg.timings),
        t_eval_ms: ms(t_eval, cfg.timings),
        min_sv: factors.min_sv,
        max_sv: factors.max_sv,
        pinv_norm: factors.pinv_norm,
    })
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

/// Write rows as CSV with the canonical header. `.` decimal separator, no
/// locale formatting.
pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map_err = |e: csv::Error| Error::InvalidConfig(format!("csv write: {e}"));
    w.write_record(CSV_HEADER).map_err(map_err)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.kernel.clone(),
            fmt_f64(r.sigma),
            r.m_requested.to_string(),
            r.m_actual.to_string(),
            r.run.to_string(),
            r.seed.to_string(),
            fmt_f64(r.err_value),
            r.err_norm_kind.clone(),
            fmt_f64(r.relative_err),
            fmt_f64(r.t_select_ms),
            fmt_f64(r.t_factor_ms),
            fmt_f64(r.t_eval_ms),
            fmt_f64(r.min_sv),
            fmt_f64(r.max_sv),
            fmt_f64(r.pinv_norm),
        ])
        .map_err(map_err)?;
    }
    w.flush().map_err(|e| Error::InvalidConfig(format!("csv flush: {e}")))?;
    Ok(())
}

pub fn write_csv_file(rows: &[ResultRow], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    write_csv(rows, f)
}

/// Read rows back from a CSV produced by [`write_csv`].
pub fn read_csv_file(path: &Path) -> Result<Vec<ResultRow>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut rdr = csv::Reader::from_reader(f);
    let parse_err = |row: usize, col: usize, msg: String| Error::CsvParse { row, col, msg };
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(i + 2, 0, e.to_string()))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::RaggedRow {
                row: i + 2,
                expected: CSV_HEADER.len(),
                found: rec.len(),
            });
        }
        let f64_at = |c: usize| -> Result<f64> {
            rec[c].parse::<f64>()
                .map_err(|e| parse_err(i + 2, c, e.to_string()))
        };
        let usize_at = |c: usize| -> Result<usize> {
            rec[c].parse::<usize>()
                .map_err(|e| parse_err(i + 2, c, e.to_string()))
        };
        out.push(ResultRow {
            method: rec[0].to_string(),
            kernel: rec[1].to_string(),
            sigma: f64_at(2)?,
            m_requested: usize_at(3)?,
            m_actual: usize_at(4)?,
            run: usize_at(5)?,
            seed: rec[6].parse().map_err(|e: std::num::ParseIntError| {
                parse_err(i + 2, 6, e.to_string())
            })?,
            err_value: f64_at(7)?,
            err_norm_kind: rec[8].to_string(),
            relative_err: f64_at(9)?,
            t_select_ms: f64_at(10)?,
            t_factor_ms: f64_at(11)?,
            t_eval_ms: f64_at(12)?,
            min_sv: f64_at(13)?,
            max_sv: f64_at(14)?,
            pinv_norm: f64_at(15)?,
        });
    }
    Ok(out)
}

/// Mean err_value / relative_err / times per (method, m_requested) group.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub method: String,
    pub m_requested: usize,
    pub runs: usize,
    pub mean_err: f64,
    pub mean_relative: f64,
    pub mean_t_select_ms: f64,
    pub mean_t_factor_ms: f64,
    pub mean_t_eval_ms: f64,
}

/// Average the measured rows per (method, rank); skip rows are excluded.
/// Errors when the rows mix norm kinds.
pub fn report(rows: &[ResultRow]) -> Result<Vec<SummaryRow>> {
    let mut norm_kind: Option<&str> = None;
    let mut groups: BTreeMap<(String, usize), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        if r.err_norm_kind.starts_with("skipped") {
            continue;
        }
        match norm_kind {
            None => norm_kind = Some(&r.err_norm_kind),
            Some(k) if k == r.err_norm_kind => {}
            Some(k) => {
                return Err(Error::InvalidConfig(format!(
                    "mixed norms in report input: {k} vs {}",
                    r.err_norm_kind
                )))
            }
        }
        groups
            .entry((r.method.clone(), r.m_requested))
            .or_default()
            .push(r);
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((method, m_requested), g) in groups {
        let n = g.len() as f64;
        out.push(SummaryRow {
            method,
            m_requested,
            runs: g.len(),
            mean_err: g.iter().map(|r| r.err_value).sum::<f64>() / n,
            mean_relative: g.iter().map(|r| r.relative_err).sum::<f64>() / n,
            mean_t_select_ms: g.iter().map(|r| r.t_select_ms).sum::<f64>() / n,
            mean_t_factor_ms: g.iter().map(|r| r.t_factor_ms).sum::<f64>() / n,
            mean_t_eval_ms: g.iter().map(|r| r.t_eval_ms).sum::<f64>() / n,
        });
    }
    Ok(out)
}

pub fn write_report_csv<W: std::io::Write>(rows: &[SummaryRow], mut out: W) -> Result<()> {
    let werr = |e: std::io::Error| Error::InvalidConfig(format!("report write: {e}"));
    writeln!(
        out,
        "method,m_requested,runs,mean_err,mean_relative,mean_t_select_ms,mean_t_factor_ms,mean_t_eval_ms"
    )
    .map_err(werr)?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.method,
            r.m_requested,
            r.runs,
            fmt_f64(r.mean_err),
            fmt_f64(r.mean_relative),
            fmt_f64(r.mean_t_select_ms),
            fmt_f64(r.mean_t_factor_ms),
            fmt_f64(r.mean_t_eval_ms)
        )
        .map_err(werr)?;
    }
    Ok(())
}

/// Parse a flat `key = value` config file; `#` starts a comment, blank lines
/// are skipped. Later keys override earlier ones.
pub fn parse_kv_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{synth_clusters, ClusterSpec, Dataset};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn ds2d(n: usize, seed: u64) -> Dataset {
        synth_clusters(
            &[
                ClusterSpec {
                    center: vec![0.0, 0.0],
                    spread: 1.0,
                    count: n / 2,
                },
                ClusterSpec {
                    center: vec![2.0, 1.0],
                    spread: 0.5,
                    count: n - n / 2,
                },
            ],
            seed,
        )
        .unwrap()
    }

    #[test]
    fn resolve_sigma_rules() {
        let ds = Dataset::new(DMatrix::from_column_slice(2, 1, &[-1.0, 1.0]), "pm1");
        assert_abs_diff_eq!(resolve_sigma(SigmaRule::HalfRadius, &ds).unwrap(), 0.5);
        assert_abs_diff_eq!(
            resolve_sigma(SigmaRule::Absolute(2.3), &ds).unwrap(),
            2.3
        );
        assert_abs_diff_eq!(
            resolve_sigma(SigmaRule::FractionOfRadius(0.1), &ds).unwrap(),
            0.1
        );
        assert!(resolve_sigma(SigmaRule::Absolute(0.0), &ds).is_err());
    }

    #[test]
    fn sigma_rule_parsing() {
        assert_eq!("half-radius".parse::<SigmaRule>().unwrap(), SigmaRule::HalfRadius);
        assert_eq!("frac:0.25".parse::<SigmaRule>().unwrap(), SigmaRule::FractionOfRadius(0.25));
        assert_eq!("2.3".parse::<SigmaRule>().unwrap(), SigmaRule::Absolute(2.3));
        assert!("bogus".parse::<SigmaRule>().is_err());
    }

    #[test]
    fn stochastic_cardinality() {
        let ds = ds2d(60, 1);
        let cfg = SweepConfig {
            kernel: KernelFamily::Gaussian,
            sigma: SigmaRule::HalfRadius,
            methods: vec![Method::Uniform, Method::Kmeans],
            ranks: vec![5, 10, 15],
            runs: 10,
            timings: false,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&ds, &cfg).unwrap();
        assert_eq!(rows.len(), 60);
    }

    #[test]
    fn deterministic_methods_run_once() {
        let ds = ds2d(50, 2);
        let cfg = SweepConfig {
            methods: vec![Method::AnchorNet, Method::Fps, Method::Uniform],
            ranks: vec![8],
            runs: 3,
            timings: false,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&ds, &cfg).unwrap();
        assert_eq!(rows.len(), 1 + 1 + 3);
        for r in &rows {
            if r.method == "anchornet" {
                assert!(r.m_actual <= r.m_requested);
            } else {
                assert_eq!(r.m_actual, r.m_requested);
            }
        }
    }

    #[test]
    fn rerun_is_byte_identical() {
        let ds = ds2d(40, 3);
        let cfg = SweepConfig {
            methods: vec![Method::AnchorNet, Method::Uniform],
            ranks: vec![5, 9],
            runs: 3,
            timings: false,
            ..SweepConfig::default()
        };
        let mut a = Vec::new();
        write_csv(&run_sweep(&ds, &cfg).unwrap(), &mut a).unwrap();
        let mut b = Vec::new();
        write_csv(&run_sweep(&ds, &cfg).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(&(CSV_HEADER.join(",") + "\n")));
    }

    #[test]
    fn incompatible_cells_become_skip_rows() {
        let ds = ds2d(40, 4);
        let cfg = SweepConfig {
            kernel: KernelFamily::Sigmoid,
            sigma: SigmaRule::Absolute(1.0),
            methods: vec![Method::Rls, Method::Cholesky, Method::Uniform],
            ranks: vec![5],
            runs: 2,
            timings: false,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&ds, &cfg).unwrap();
        let skipped: Vec<_> = rows
            .iter()
            .filter(|r| r.err_norm_kind.starts_with("skipped"))
            .collect();
        assert_eq!(skipped.len(), 2);
        assert!(skipped.iter().all(|r| r.err_value.is_nan()));
        assert_eq!(rows.len(), 2 + 2); // two skips + two uniform runs
    }

    #[test]
    fn report_means() {
        let base = ResultRow {
            method: "uniform".into(),
            kernel: "gaussian".into(),
            sigma: 1.0,
            m_requested: 5,
            m_actual: 5,
            run: 0,
            seed: 0,
            err_value: 1.0,
            err_norm_kind: "two".into(),
            relative_err: 0.1,
            t_select_ms: 0.0,
            t_factor_ms: 0.0,
            t_eval_ms: 0.0,
            min_sv: 0.0,
            max_sv: 1.0,
            pinv_norm: 1.0,
        };
        let mut r2 = base.clone();
        r2.run = 1;
        r2.err_value = 3.0;
        let summary = report(&[base.clone(), r2]).unwrap();
        assert_eq!(summary.len(), 1);
        assert_abs_diff_eq!(summary[0].mean_err, 2.0);
        assert_eq!(summary[0].runs, 2);

        let single = report(std::slice::from_ref(&base)).unwrap();
        assert_abs_diff_eq!(single[0].mean_err, 1.0);

        let mut mixed = base.clone();
        mixed.err_norm_kind = "fro".into();
        assert!(report(&[base, mixed]).is_err());
    }

    #[test]
    fn report_group_count() {
        let ds = ds2d(50, 5);
        let cfg = SweepConfig {
            methods: vec![Method::Uniform, Method::Kmeans],
            ranks: vec![4, 8, 12],
            runs: 4,
            timings: false,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&ds, &cfg).unwrap();
        let summary = report(&rows).unwrap();
        assert_eq!(summary.len(), 6);
    }

    #[test]
    fn validation_errors() {
        let ds = ds2d(30, 6);
        let mut cfg = SweepConfig {
            ranks: vec![10, 10],
            timings: false,
            ..SweepConfig::default()
        };
        assert!(run_sweep(&ds, &cfg).is_err());
        cfg.ranks = vec![5, 10];
        cfg.runs = 0;
        assert!(run_sweep(&ds, &cfg).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = ds2d(30, 9);
        let cfg = SweepConfig {
            methods: vec![Method::Uniform],
            ranks: vec![4],
            runs: 2,
            timings: false,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&ds, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        write_csv_file(&rows, &path).unwrap();
        let back = read_csv_file(&path).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.method, b.method);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.err_value.to_bits(), b.err_value.to_bits());
        }
    }

    #[test]
    fn kv_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.conf");
        std::fs::write(
            &path,
            "# comment\nkernel = gaussian\nranks=5,10 # trailing\n\nseed = 7\n",
        )
        .unwrap();
        let kv = parse_kv_file(&path).unwrap();
        assert_eq!(
            kv,
            vec![
                ("kernel".to_string(), "gaussian".to_string()),
                ("ranks".to_string(), "5,10".to_string()),
                ("seed".to_string(), "7".to_string()),
            ]
        );
        std::fs::write(&path, "no equals sign\n").unwrap();
        assert!(parse_kv_file(&path).is_err());
    }
}
