//! `simulate` — cache-cluster simulation runner.
//!
//! Runs one experiment, a parameter sweep, or a figure preset, and writes
//! the resulting rate table as CSV or JSON. Exit codes: 0 on success, 2 for
//! an invalid configuration, 1 for I/O failures.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser};

use poolsim_core::{emit_table, run_spec, ConfigFile, Error, TableFormat};

#[derive(Debug, Parser)]
#[command(
    name = "simulate",
    about = "Simulate a cache cluster with limited storage and service capacity",
    long_about = None,
    after_help = "Examples:\n  \
        simulate --preset fig8iii --seed 42 --out results.csv\n  \
        simulate --config experiment.toml\n  \
        simulate --n 1000 --m 1000 --r 800 --k 2 --a 2 --beta 0.3 \\\n           \
        --placement pp --delivery mlp --sweep k=1,2,3,4,5,6"
)]
struct Args {
    /// TOML config file; explicit flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Figure preset: fig8i, fig8ii, fig8iii, fig9i, fig9ii, fig9iii.
    #[arg(long)]
    preset: Option<String>,
    /// Catalog size (number of files).
    #[arg(long)]
    n: Option<u32>,
    /// Number of caches.
    #[arg(long, conflicts_with = "c")]
    m: Option<u32>,
    /// Catalog-to-cache ratio c = n/m (alternative to --m).
    #[arg(long)]
    c: Option<f64>,
    /// Requests per time-slot.
    #[arg(long, conflicts_with = "rho")]
    r: Option<u32>,
    /// Request density rho = r/m in (0, 1] (alternative to --r).
    #[arg(long)]
    rho: Option<f64>,
    /// Storage capacity per cache, in file units.
    #[arg(long)]
    k: Option<u32>,
    /// Service limit: sub-requests per cache per slot.
    #[arg(long)]
    a: Option<u32>,
    /// Zipf popularity exponent.
    #[arg(long)]
    beta: Option<f64>,
    /// Knapsack-storage tail parameter in (0, beta-1); default (beta-1)/2.
    #[arg(long)]
    delta: Option<f64>,
    /// Placement policy: pp | ks.
    #[arg(long)]
    placement: Option<String>,
    /// Delivery policy or comma list: omr | mlp | orr | ollr.
    #[arg(long)]
    delivery: Option<String>,
    /// Monte Carlo iterations per point.
    #[arg(long)]
    iters: Option<u32>,
    /// Master seed; every stream derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output format: csv | json.
    #[arg(long)]
    format: Option<String>,
    /// Sweep one axis, e.g. --sweep k=1,2,3 (axes: k, a, ak, n, beta).
    #[arg(long)]
    sweep: Option<String>,
    /// Tabulate the storage lower bound per point.
    #[arg(long, action = ArgAction::SetTrue)]
    lower_bound: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the trial pool (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

impl Args {
    fn as_overrides(&self) -> ConfigFile {
        ConfigFile {
            preset: self.preset.clone(),
            n: self.n,
            m: self.m,
            c: self.c,
            r: self.r,
            rho: self.rho,
            k: self.k,
            a: self.a,
            beta: self.beta,
            delta: self.delta,
            placement: self.placement.clone(),
            delivery: self.delivery.clone(),
            iters: self.iters,
            seed: self.seed,
            sweep: self.sweep.clone(),
            lower_bound: if self.lower_bound { Some(true) } else { None },
            format: self.format.clone(),
            out: self.out.as_ref().map(|p| p.display().to_string()),
            workers: self.workers,
        }
    }
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::InvalidArgument(_) | Error::Parse(_) | Error::PlacementInfeasible { .. } => {
            ExitCode::from(2)
        }
        _ => ExitCode::FAILURE,
    }
}

fn run() -> Result<(), (String, ExitCode)> {
    let args = Args::parse();

    let mut merged = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|err| {
                (
                    format!("cannot read {}: {err}", path.display()),
                    ExitCode::from(2),
                )
            })?;
            ConfigFile::from_toml(&text)
                .map_err(|err| (format!("{}: {err}", path.display()), ExitCode::from(2)))?
        }
        None => ConfigFile::default(),
    };
    merged = merged.merged_with(&args.as_overrides());

    let format = match merged.format.as_deref() {
        None => TableFormat::Csv,
        Some(raw) => raw
            .parse::<TableFormat>()
            .map_err(|err| (err.to_string(), ExitCode::from(2)))?,
    };

    if let Some(workers) = merged.workers {
        if workers == 0 {
            return Err(("workers must be at least 1".into(), ExitCode::from(2)));
        }
        // Ignore the error if a pool already exists (repeat invocations).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }

    let spec = merged
        .to_spec()
        .map_err(|err| (err.to_string(), ExitCode::from(2)))?;

    let resolved = spec.config.resolve().expect("validated by to_spec");
    eprintln!(
        "simulate: preset={} placement={} deliveries={} n={} m={} r={} k={} a={} beta={} delta={} \
         iters={} seed={} sweep={} workers={}",
        merged.preset.as_deref().unwrap_or("-"),
        resolved.placement,
        spec.deliveries
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(","),
        resolved.n,
        resolved.m,
        resolved.r,
        resolved.k,
        resolved.a,
        resolved.beta,
        resolved.effective_delta(),
        resolved.iterations,
        resolved.master_seed,
        spec.axis
            .map(|axis| axis.to_string())
            .unwrap_or_else(|| "-".into()),
        merged
            .workers
            .map(|w| w.to_string())
            .unwrap_or_else(|| "auto".into()),
    );

    let rows = run_spec(&spec).map_err(|err| (err.to_string(), exit_code_for(&err)))?;
    let text = emit_table(&rows, format);

    match &merged.out {
        Some(path) => fs::write(path, text)
            .map_err(|err| (format!("cannot write {path}: {err}"), ExitCode::FAILURE))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|err| (format!("cannot write to stdout: {err}"), ExitCode::FAILURE))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((message, code)) => {
            eprintln!("simulate: {message}");
            code
        }
    }
}
