//! Benchmark CLI for the anchor-net Nyström library.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use anchor_net::anchornet::{self, AnchorNetConfig};
use anchor_net::bench::{
    self, parse_kv_file, report, resolve_sigma, write_csv_file, write_report_csv, Method,
    SigmaRule, SweepConfig,
};
use anchor_net::dataio::{self, ClusterSpec, Dataset};
use anchor_net::diagnostics;
use anchor_net::error::{Error, Result};
use anchor_net::kernels::{KernelFamily, KernelSpec};
use anchor_net::lowdisc::{star_discrepancy, DiscrepancyMethod, Region};
use anchor_net::nystrom::{self, ErrorNorm, Stabilization};
use anchor_net::selectors::{self, SelectorConfig};

#[derive(Parser)]
#[command(name = "nysbench", about = "Anchor-net Nyström benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic clustered dataset CSV.
    Synth(SynthArgs),
    /// Select landmarks and print their indices (or centroid coordinates).
    Select(SelectArgs),
    /// Factor one approximation and report its error.
    Approximate(ApproximateArgs),
    /// Marking errors, fill distance, and the max-norm error bound.
    Diagnose(DiagnoseArgs),
    /// Star discrepancy of a point-set CSV.
    Discrepancy(DiscrepancyArgs),
    /// Run a method x rank x run sweep and write a CSV of raw rows.
    Sweep(SweepArgs),
    /// Aggregate a sweep CSV into per-(method, rank) means.
    Report(ReportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV of numeric rows.
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated 0-based column selection (default: all columns).
    #[arg(long)]
    cols: Option<String>,
    /// Skip the first CSV line (column headers).
    #[arg(long)]
    header: bool,
    /// Standardize columns to zero mean and unit variance.
    #[arg(long)]
    standardize: bool,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let cols = match &self.cols {
            Some(s) => Some(parse_usize_list(s)?),
            None => None,
        };
        let ds = dataio::load_csv(&self.data, cols.as_deref(), self.header)?;
        Ok(if self.standardize {
            dataio::standardize(&ds)
        } else {
            ds
        })
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Cluster list `c1 c2 ... :spread:count`, clusters separated by `;`.
    #[arg(long, default_value = "0 0:1:500;3 1:0.5:500")]
    spec: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "anchornet")]
    method: Method,
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Kernel family (only consulted by the rls selector).
    #[arg(long, default_value = "gaussian")]
    kernel: KernelFamily,
    /// Bandwidth rule: a number, `half-radius`, or `frac:F`.
    #[arg(long, default_value = "half-radius")]
    sigma: SigmaRule,
    #[arg(long, default_value_t = 4.0)]
    tess_mult: f64,
}

#[derive(Args)]
struct ApproximateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "gaussian")]
    kernel: KernelFamily,
    #[arg(long, default_value = "half-radius")]
    sigma: SigmaRule,
    #[arg(long, default_value = "anchornet")]
    method: Method,
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stabilization: none, pinv-eps, or qr-eps.
    #[arg(long, default_value = "none")]
    stabilize: String,
    /// Truncation threshold for pinv-eps / qr-eps.
    #[arg(long, default_value_t = 1e-12)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long)]
    norm: Option<ErrorNorm>,
    /// Evaluate the error over a seeded subset of this size.
    #[arg(long)]
    eval_sample: Option<usize>,
    #[arg(long, default_value_t = 4.0)]
    tess_mult: f64,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "gaussian")]
    kernel: KernelFamily,
    #[arg(long, default_value = "half-radius")]
    sigma: SigmaRule,
    #[arg(long, default_value = "anchornet")]
    method: Method,
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4.0)]
    tess_mult: f64,
}

#[derive(Args)]
struct DiscrepancyArgs {
    #[command(flatten)]
    data: DataArgs,
    /// `exact` (d <= 2) or `mc`.
    #[arg(long, default_value = "exact")]
    method: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Flat key=value config file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kernel: Option<KernelFamily>,
    #[arg(long)]
    sigma: Option<SigmaRule>,
    /// Comma-separated method list.
    #[arg(long)]
    methods: Option<String>,
    /// Single rank (shorthand for a one-element rank list).
    #[arg(long)]
    rank: Option<usize>,
    /// Comma-separated strictly increasing rank list.
    #[arg(long)]
    ranks: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stabilize: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    norm: Option<ErrorNorm>,
    #[arg(long)]
    eval_sample: Option<usize>,
    #[arg(long)]
    tess_mult: Option<f64>,
    /// Zero the timing columns (byte-reproducible output).
    #[arg(long)]
    no_timings: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Raw sweep CSV to aggregate.
    #[arg(long)]
    data: PathBuf,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidConfig(format!("bad list entry {t:?}: {e}")))
        })
        .collect()
}

fn parse_cluster_spec(s: &str) -> Result<Vec<ClusterSpec>> {
    let mut out = Vec::new();
    for part in s.split(';') {
        let fields: Vec<&str> = part.split(':').collect();
        if fields.len() != 3 {
            return Err(Error::InvalidConfig(format!(
                "cluster {part:?}: expected `center:spread:count`"
            )));
        }
        let center: Vec<f64> = fields[0]
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::InvalidConfig(format!("bad center entry {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        let spread: f64 = fields[1]
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("bad spread: {e}")))?;
        let count: usize = fields[2]
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("bad count: {e}")))?;
        out.push(ClusterSpec {
            center,
            spread,
            count,
        });
    }
    Ok(out)
}

fn parse_stabilization(name: &str, eps: f64) -> Result<Stabilization> {
    match name {
        "none" => Ok(Stabilization::None),
        "pinv-eps" => Ok(Stabilization::PinvEps(eps)),
        "qr-eps" => Ok(Stabilization::QrEps(eps)),
        other => Err(Error::InvalidConfig(format!(
            "unknown stabilization {other:?}"
        ))),
    }
}

fn select_landmarks(
    ds: &Dataset,
    method: Method,
    rank: usize,
    seed: u64,
    spec: &KernelSpec,
    tess_mult: f64,
) -> Result<anchornet::LandmarkSet> {
    let sel = SelectorConfig::default();
    match method {
        Method::AnchorNet => {
            let cfg = AnchorNetConfig {
                tess_multiplier: tess_mult,
                ..AnchorNetConfig::default()
            };
            anchornet::select_landmarks(ds, rank, &cfg)
        }
        Method::Uniform => selectors::uniform(ds, rank, seed),
        Method::Kmeans => selectors::kmeans(ds, rank, sel.kmeans_iters, seed),
        Method::Fps => selectors::fps(ds, rank, seed),
        Method::Rls => selectors::rls_exact(ds, spec, sel.rls_gamma, rank, seed),
        Method::Cholesky => Err(Error::InvalidConfig(
            "cholesky is a factorization, not a landmark selector".into(),
        )),
    }
}

fn write_dataset_csv(ds: &Dataset, out: Option<&PathBuf>) -> Result<()> {
    let mut text = String::new();
    for i in 0..ds.n() {
        let row: Vec<String> = (0..ds.d()).map(|j| format!("{}", ds.points[(i, j)])).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Synth(a) => {
            let spec = parse_cluster_spec(&a.spec)?;
            let ds = dataio::synth_clusters(&spec, a.seed)?;
            write_dataset_csv(&ds, a.out.as_ref())?;
        }
        Command::Select(a) => {
            let ds = a.data.load()?;
            let sigma = resolve_sigma(a.sigma, &ds)?;
            let spec = KernelSpec::new(a.kernel, sigma);
            let lm = select_landmarks(&ds, a.method, a.rank, a.seed, &spec, a.tess_mult)?;
            eprintln!(
                "method={} m_requested={} m_actual={}",
                lm.method, lm.m_requested, lm.m_actual()
            );
            if lm.indices.is_empty() {
                for i in 0..lm.coords.nrows() {
                    let row: Vec<String> =
                        (0..lm.coords.ncols()).map(|j| format!("{}", lm.coords[(i, j)])).collect();
                    println!("{}", row.join(","));
                }
            } else {
                for &i in &lm.indices {
                    println!("{i}");
                }
            }
        }
        Command::Approximate(a) => {
            let ds = a.data.load()?;
            let sigma = resolve_sigma(a.sigma, &ds)?;
            let spec = KernelSpec::new(a.kernel, sigma);
            let stab = parse_stabilization(&a.stabilize, a.eps)?;
            let f = if a.method == Method::Cholesky {
                nystrom::pivoted_cholesky(&ds, &spec, a.rank, a.beta)?
            } else {
                let lm = select_landmarks(&ds, a.method, a.rank, a.seed, &spec, a.tess_mult)?;
                nystrom::factor(&ds, &lm, &spec, stab, a.beta)?
            };
            let norm = a.norm.unwrap_or({
                if ds.n() <= nystrom::DENSE_GUARD {
                    ErrorNorm::Two
                } else {
                    ErrorNorm::Fro
                }
            });
            let subset = match a.eval_sample {
                Some(s) => Some((s.min(ds.n()), a.seed)),
                None if ds.n() > nystrom::DENSE_GUARD => Some((10_000.min(ds.n()), a.seed)),
                None => None,
            };
            let rep = nystrom::approx_error(&ds, &f, &spec, norm, subset, a.beta)?;
            println!(
                "method={} kernel={} sigma={} rank={} norm={} err={:.6e} relative={:.6e} \
                 eval_size={} min_sv={:.6e} max_sv={:.6e} pinv_norm={:.6e} \
                 t_select_ms={:.3} t_factor_ms={:.3} t_eval_ms={:.3}",
                a.method,
                a.kernel,
                sigma,
                f.rank(),
                norm,
                rep.value,
                rep.relative,
                rep.eval_size,
                f.min_sv,
                f.max_sv,
                f.pinv_norm,
                rep.t_select.as_secs_f64() * 1e3,
                rep.t_factor.as_secs_f64() * 1e3,
                rep.t_eval.as_secs_f64() * 1e3,
            );
        }
        Command::Diagnose(a) => {
            let ds = a.data.load()?;
            let sigma = resolve_sigma(a.sigma, &ds)?;
            let spec = KernelSpec::new(a.kernel, sigma);
            let lm = select_landmarks(&ds, a.method, a.rank, a.seed, &spec, a.tess_mult)?;
            let me = diagnostics::marking_errors(&ds, &lm, &spec)?;
            let geo = diagnostics::fill_distance(&ds, &lm)?;
            println!(
                "e_r={:.6e} e_hat_r={:.6e} pinv_norm={:.6e} bound={:.6e} delta={:.6e}",
                me.e_r, me.e_hat_r, me.pinv_norm, me.bound, geo.delta
            );
            if ds.n() <= diagnostics::VERIFY_GUARD {
                let (err, bound, holds) = diagnostics::verify_bound(&ds, &lm, &spec)?;
                println!("max_norm_error={err:.6e} bound={bound:.6e} holds={holds}");
            }
        }
        Command::Discrepancy(a) => {
            let ds = a.data.load()?;
            let method = match a.method.as_str() {
                "exact" => match ds.d() {
                    1 => DiscrepancyMethod::Exact1d,
                    2 => DiscrepancyMethod::Exact2d,
                    d => return Err(Error::ExactDiscrepancyDim(d)),
                },
                "mc" => DiscrepancyMethod::MonteCarlo {
                    samples: a.samples,
                    seed: a.seed,
                },
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown discrepancy method {other:?}"
                    )))
                }
            };
            let est = star_discrepancy(&ds.points, &Region::UnitCube, method)?;
            println!(
                "n={} d={} value={:.6e} lower_bound={}",
                ds.n(),
                ds.d(),
                est.value,
                est.is_lower_bound
            );
        }
        Command::Sweep(a) => {
            let ds = a.data.load()?;
            let cfg = build_sweep_config(&a)?;
            let rows = bench::run_sweep(&ds, &cfg)?;
            write_csv_file(&rows, &a.out)?;
            eprintln!("wrote {} rows to {}", rows.len(), a.out.display());
        }
        Command::Report(a) => {
            let rows = bench::read_csv_file(&a.data)?;
            let summary = report(&rows)?;
            match &a.out {
                Some(p) => {
                    let f = std::fs::File::create(p).map_err(|e| Error::Io {
                        path: p.display().to_string(),
                        source: e,
                    })?;
                    write_report_csv(&summary, f)?;
                }
                None => write_report_csv(&summary, std::io::stdout())?,
            }
        }
    }
    Ok(())
}

fn build_sweep_config(a: &SweepArgs) -> Result<SweepConfig> {
    let mut cfg = SweepConfig {
        timings: true,
        ..SweepConfig::default()
    };
    let mut stab_name: Option<String> = None;
    let mut stab_eps: Option<f64> = None;
    if let Some(path) = &a.config {
        for (k, v) in parse_kv_file(path)? {
            match k.as_str() {
                "kernel" => cfg.kernel = v.parse()?,
                "sigma" => cfg.sigma = v.parse()?,
                "methods" => cfg.methods = parse_method_list(&v)?,
                "ranks" => cfg.ranks = parse_usize_list(&v)?,
                "runs" => cfg.runs = parse_num(&v)?,
                "seed" => cfg.seed = parse_num(&v)?,
                "stabilize" => stab_name = Some(v),
                "eps" => stab_eps = Some(parse_num(&v)?),
                "beta" => cfg.beta = parse_num(&v)?,
                "norm" => cfg.norm = Some(v.parse()?),
                "eval_sample" => cfg.eval_sample = Some(parse_num(&v)?),
                "tess_mult" => cfg.tess_mult = parse_num(&v)?,
                "timings" => cfg.timings = parse_bool(&v)?,
                other => {
                    return Err(Error::InvalidConfig(format!("unknown config key {other:?}")))
                }
            }
        }
    }
    if let Some(v) = a.kernel {
        cfg.kernel = v;
    }
    if let Some(v) = a.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = &a.methods {
        cfg.methods = parse_method_list(v)?;
    }
    if let Some(v) = &a.ranks {
        cfg.ranks = parse_usize_list(v)?;
    } else if let Some(r) = a.rank {
        cfg.ranks = vec![r];
    }
    if let Some(v) = a.runs {
        cfg.runs = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = &a.stabilize {
        stab_name = Some(v.clone());
    }
    if let Some(v) = a.eps {
        stab_eps = Some(v);
    }
    if let Some(name) = stab_name {
        cfg.stabilization = parse_stabilization(&name, stab_eps.unwrap_or(1e-12))?;
    }
    if let Some(v) = a.beta {
        cfg.beta = v;
    }
    if let Some(v) = a.norm {
        cfg.norm = Some(v);
    }
    if let Some(v) = a.eval_sample {
        cfg.eval_sample = Some(v);
    }
    if let Some(v) = a.tess_mult {
        cfg.tess_mult = v;
    }
    if a.no_timings {
        cfg.timings = false;
    }
    Ok(cfg)
}

fn parse_method_list(s: &str) -> Result<Vec<Method>> {
    s.split(',').map(|t| Method::from_str(t.trim())).collect()
}

fn parse_num<T: FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse()
        .map_err(|e| Error::InvalidConfig(format!("bad number {s:?}: {e}")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::InvalidConfig(format!("bad boolean {other:?}"))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
