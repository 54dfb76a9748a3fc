//! Command-line front end: one subcommand per computation, CSV outputs and a
//! JSON manifest per run that is enough to reproduce it.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{covariance_legendre, covariance_spectral_many, memory_report, CovarianceQuery};
use crate::entropy1d::{run_experiment, Experiment, ExperimentOptions};
use crate::error::Error;
use crate::field_sim::{
    empirical_spectrum, simulate_coefficients_with, simulate_ensemble, simulation_measure, synthesize,
    write_coefficients_csv, write_field_binary, write_field_csv,
};
use crate::kernel::{h1, h2, KernelQuery};
use crate::measure::{DiffusionParams, ModelConfig};
use crate::spectrum::spectrum_range;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "HYPERDIFF_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for usage and configuration problems, 3 for numerical accuracy
    /// failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::Accuracy { .. }) => 3,
            CliError::Lib(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } => 4,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Parser)]
#[command(name = "hyperdiff", version, about = "Telegraph-equation random fields on the sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the transfer function H̃ and its two branches.
    Kernel(KernelArgs),
    /// Angular power spectrum C_l(t, t').
    Spectrum(SpectrumArgs),
    /// Covariance R(cos γ, t, t') by the spectral and/or Legendre route.
    Covariance(CovarianceArgs),
    /// Simulate Laplace coefficients and field rasters.
    Simulate(SimulateArgs),
    /// Short/long-range dependence classification and memory integral.
    Memory(MemoryArgs),
    /// One-dimensional entropy experiments.
    Entropy1d(EntropyArgs),
    /// Re-run a recorded command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long = "D")]
    pub d: Option<f64>,
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub mu: Vec<f64>,
    #[arg(long = "t", value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub t: Vec<f64>,
    /// Output CSV; standard output when omitted (no manifest is written then).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Number of degrees, l = 0..lmax-1.
    #[arg(long)]
    pub lmax: usize,
    /// Nondecreasing list of times t.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
    pub times: Vec<f64>,
    /// Partner times t' (same length as --times); defaults to t' = t.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t_prime: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Route {
    Spectral,
    Legendre,
    Both,
}

#[derive(Debug, Args)]
pub struct CovarianceArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Angular distances in radians, each in [0, π].
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub gammas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
    pub times: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t_prime: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "both")]
    pub route: Route,
    /// Degrees kept in the Legendre series.
    #[arg(long, default_value_t = 64)]
    pub lmax: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldFormat {
    Csv,
    Binary,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Truncation degree L (degrees 0..L-1).
    #[arg(long)]
    pub lmax: usize,
    /// Raster size as NTHETAxNPHI.
    #[arg(long, default_value = "32x64")]
    pub grid: String,
    #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FieldFormat,
    /// Simulate this many realizations (seeds seed, seed+1, ...) and write the
    /// empirical spectrum instead of rasters.
    #[arg(long)]
    pub ensemble: Option<usize>,
    /// Gauss–Legendre atoms per continuous segment.
    #[arg(long, default_value_t = crate::field_sim::DEFAULT_QUAD_NODES)]
    pub n_quad: usize,
}

#[derive(Debug, Args)]
pub struct MemoryArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long = "t", default_value_t = 0.0)]
    pub t: f64,
    /// Horizon H_max of the memory integral.
    #[arg(long)]
    pub hmax: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long)]
    pub h_step: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// standing_wave, point_source or rectangle.
    #[arg(long)]
    pub experiment: String,
    #[arg(long, default_value_t = crate::entropy1d::DEFAULT_INTERVALS)]
    pub n_intervals: usize,
    #[arg(long)]
    pub n_modes: Option<usize>,
    #[arg(long, default_value_t = 3.0 * std::f64::consts::PI)]
    pub half_length: f64,
    #[arg(long, default_value_t = 2.0)]
    pub width: f64,
    #[arg(long, default_value_t = 2)]
    pub wave_mode: usize,
    #[arg(long, default_value_t = 20.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,4,8")]
    pub snapshots: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded location.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    /// Resolved configuration, embedded so replays do not depend on the file.
    pub config: Option<ModelConfig>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_seconds: f64,
}

struct RunRecord {
    config: Option<ModelConfig>,
    outputs: Vec<PathBuf>,
    seed: Option<u64>,
    manifest_path: Option<PathBuf>,
}

/// Parses arguments, configures threads, runs, and returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let recorded: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let outcome = configure_threads().and_then(|()| execute(cli.command, recorded, None));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(command: Command, args: Vec<String>, config_override: Option<ModelConfig>) -> CliResult<()> {
    let start = Instant::now();
    let (name, record) = match command {
        Command::Kernel(a) => ("kernel", cmd_kernel(a, config_override)?),
        Command::Spectrum(a) => ("spectrum", cmd_spectrum(a, config_override)?),
        Command::Covariance(a) => ("covariance", cmd_covariance(a, config_override)?),
        Command::Simulate(a) => ("simulate", cmd_simulate(a, config_override)?),
        Command::Memory(a) => ("memory", cmd_memory(a, config_override)?),
        Command::Entropy1d(a) => ("entropy1d", cmd_entropy1d(a)?),
        Command::Replay(a) => return cmd_replay(a),
    };
    if let Some(path) = record.manifest_path {
        let manifest = RunManifest {
            subcommand: name.to_string(),
            args,
            config: record.config,
            outputs: record.outputs,
            seed: record.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: start.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(io_err(&path))?;
    }
    Ok(())
}

fn cmd_replay(a: ReplayArgs) -> CliResult<()> {
    let text = fs::read_to_string(&a.manifest).map_err(io_err(&a.manifest))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("manifest {}: {e}", a.manifest.display())))?;
    if manifest.subcommand == "replay" {
        return Err(CliError::Usage("a replay manifest cannot itself be replayed".into()));
    }
    if let Some(cfg) = &manifest.config {
        cfg.params.validate()?;
    }
    let mut args = manifest.args.clone();
    if let Some(out) = &a.out {
        replace_flag(&mut args, "--out", &out.to_string_lossy());
    }
    let argv = std::iter::once("hyperdiff".to_string()).chain(args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(format!("manifest arguments: {e}")))?;
    execute(cli.command, args, manifest.config)
}

fn replace_flag(args: &mut Vec<String>, flag: &str, value: &str) {
    let prefix = format!("{flag}=");
    if let Some(i) = args.iter().position(|a| a == flag) {
        if i + 1 < args.len() {
            args[i + 1] = value.to_string();
            return;
        }
    }
    if let Some(i) = args.iter().position(|a| a.starts_with(&prefix)) {
        args[i] = format!("{prefix}{value}");
        return;
    }
    args.push(flag.to_string());
    args.push(value.to_string());
}

fn load_config(path: &Path, config_override: Option<ModelConfig>) -> CliResult<ModelConfig> {
    if let Some(cfg) = config_override {
        return Ok(cfg);
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(ModelConfig::parse(&text)?)
}

fn create_file(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Writes `body` to `out`, or standard output when `out` is `None`.
fn emit<F>(out: Option<&Path>, body: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let mut w = create_file(path)?;
            body(&mut w).and_then(|()| w.flush()).map_err(io_err(path))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn sidecar_manifest(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn file_record(config: Option<ModelConfig>, out: Option<&Path>, seed: Option<u64>) -> RunRecord {
    RunRecord {
        config,
        outputs: out.map(|p| vec![p.to_path_buf()]).unwrap_or_default(),
        seed,
        manifest_path: out.map(sidecar_manifest),
    }
}

fn time_pairs(times: &[f64], t_prime: Option<&[f64]>) -> CliResult<Vec<(f64, f64)>> {
    if times.is_empty() {
        return Err(CliError::Usage("at least one time is required".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("--times must be nondecreasing".into()).into());
    }
    match t_prime {
        None => Ok(times.iter().map(|&t| (t, t)).collect()),
        Some(tp) if tp.len() == times.len() => Ok(times.iter().cloned().zip(tp.iter().cloned()).collect()),
        Some(_) => Err(CliError::Usage("--t-prime must have as many entries as --times".into())),
    }
}

fn cmd_kernel(a: KernelArgs, config_override: Option<ModelConfig>) -> CliResult<RunRecord> {
    let config = match (&a.config, config_override) {
        (_, Some(cfg)) => Some(cfg),
        (Some(path), None) => Some(load_config(path, None)?),
        (None, None) => None,
    };
    let params = match (config.as_ref(), a.c, a.d) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(CliError::Usage("give either --config or --c/--D, not both".into()))
        }
        (Some(cfg), None, None) => cfg.params,
        (None, Some(c), Some(d)) => DiffusionParams::new(c, d)?,
        _ => return Err(CliError::Usage("kernel needs --config or both --c and --D".into())),
    };
    let mut rows = Vec::with_capacity(a.mu.len() * a.t.len());
    for &mu in &a.mu {
        for &t in &a.t {
            let q = KernelQuery::new(mu, t, params)?;
            let (v1, v2) = (h1(&q), h2(&q));
            rows.push((mu, t, v1, v2, v1 + v2));
        }
    }
    emit(a.out.as_deref(), |w| {
        writeln!(w, "mu,t,h1,h2,h")?;
        for (mu, t, v1, v2, v) in &rows {
            writeln!(w, "{mu},{t},{v1},{v2},{v}")?;
        }
        Ok(())
    })?;
    let resolved = config.unwrap_or(ModelConfig { params, measure: crate::measure::SpectralMeasure::empty() });
    Ok(file_record(Some(resolved), a.out.as_deref(), None))
}

fn cmd_spectrum(a: SpectrumArgs, config_override: Option<ModelConfig>) -> CliResult<RunRecord> {
    let cfg = load_config(&a.config, config_override)?;
    if a.lmax == 0 {
        return Err(CliError::Usage("--lmax must be at least 1".into()));
    }
    let pairs = time_pairs(&a.times, a.t_prime.as_deref())?;
    let blocks: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(t, tp)| spectrum_range(0, a.lmax, t, tp, &cfg.measure, &cfg.params))
        .collect::<Result<_, _>>()?;
    emit(a.out.as_deref(), |w| {
        writeln!(w, "t,t_prime,l,C_l")?;
        for ((t, tp), values) in pairs.iter().zip(&blocks) {
            for (l, v) in values.iter().enumerate() {
                writeln!(w, "{t},{tp},{l},{v}")?;
            }
        }
        Ok(())
    })?;
    Ok(file_record(Some(cfg), a.out.as_deref(), None))
}

fn cmd_covariance(a: CovarianceArgs, config_override: Option<ModelConfig>) -> CliResult<RunRecord> {
    let cfg = load_config(&a.config, config_override)?;
    let pairs = time_pairs(&a.times, a.t_prime.as_deref())?;
    if a.route != Route::Spectral && a.lmax == 0 {
        return Err(CliError::Usage("--lmax must be at least 1".into()));
    }
    for &g in &a.gammas {
        CovarianceQuery::new(g, 0.0, 0.0, &cfg.measure, cfg.params)?;
    }
    let rows: Vec<Vec<(f64, f64, f64, f64)>> = pairs
        .par_iter()
        .map(|&(t, tp)| {
            let spectral = if a.route == Route::Legendre {
                vec![f64::NAN; a.gammas.len()]
            } else {
                covariance_spectral_many(&a.gammas, t, tp, &cfg.measure, &cfg.params)?
            };
            a.gammas
                .iter()
                .zip(spectral)
                .map(|(&g, s)| {
                    if a.route == Route::Spectral {
                        return Ok((g, s, f64::NAN, f64::NAN));
                    }
                    let q = CovarianceQuery::new(g, t, tp, &cfg.measure, cfg.params)?;
                    let leg = covariance_legendre(&q, a.lmax)?;
                    Ok((g, s, leg.value, leg.remainder))
                })
                .collect::<Result<Vec<_>, Error>>()
        })
        .collect::<Result<_, _>>()?;
    emit(a.out.as_deref(), |w| {
        match a.route {
            Route::Spectral => writeln!(w, "t,t_prime,gamma,R")?,
            Route::Legendre => writeln!(w, "t,t_prime,gamma,R,remainder")?,
            Route::Both => writeln!(w, "t,t_prime,gamma,R_spectral,R_legendre,remainder,discrepancy")?,
        }
        for ((t, tp), block) in pairs.iter().zip(&rows) {
            for (g, s, l, r) in block {
                match a.route {
                    Route::Spectral => writeln!(w, "{t},{tp},{g},{s}")?,
                    Route::Legendre => writeln!(w, "{t},{tp},{g},{l},{r}")?,
                    Route::Both => writeln!(w, "{t},{tp},{g},{s},{l},{r},{}", (s - l).abs())?,
                }
            }
        }
        Ok(())
    })?;
    Ok(file_record(Some(cfg), a.out.as_deref(), None))
}

fn parse_grid(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Usage(format!("--grid expects NTHETAxNPHI, got '{s}'"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn cmd_simulate(a: SimulateArgs, config_override: Option<ModelConfig>) -> CliResult<RunRecord> {
    let cfg = load_config(&a.config, config_override)?;
    let (n_theta, n_phi) = parse_grid(&a.grid)?;
    fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    let mut outputs = Vec::new();
    if let Some(runs) = a.ensemble {
        if runs < 2 {
            return Err(CliError::Usage("--ensemble needs at least 2 realizations".into()));
        }
        let sim_measure = simulation_measure(&cfg.measure, a.n_quad)?;
        let ensemble = simulate_ensemble(runs, a.lmax, &a.times, &sim_measure, &cfg.params, a.seed)?;
        let mut rows = Vec::new();
        for (k, &t) in a.times.iter().enumerate() {
            let theory = spectrum_range(0, a.lmax, t, t, &sim_measure, &cfg.params)?;
            for (l, c) in theory.iter().enumerate() {
                let e = empirical_spectrum(&ensemble, l, k)?;
                rows.push((t, l, e.value, e.std_error, *c));
            }
        }
        let path = a.out.join("empirical_spectrum.csv");
        emit(Some(&path), |w| {
            writeln!(w, "t,l,C_hat,std_error,C_theory")?;
            for (t, l, v, se, c) in &rows {
                writeln!(w, "{t},{l},{v},{se},{c}")?;
            }
            Ok(())
        })?;
        outputs.push(path);
    } else {
        let cs = simulate_coefficients_with(a.lmax, &a.times, &cfg.measure, &cfg.params, a.seed, a.n_quad)?;
        for k in 0..a.times.len() {
            let grid = synthesize(&cs, k, n_theta, n_phi)?;
            let field_path = match a.format {
                FieldFormat::Csv => a.out.join(format!("field_t{k}.csv")),
                FieldFormat::Binary => a.out.join(format!("field_t{k}.bin")),
            };
            emit(Some(&field_path), |w| match a.format {
                FieldFormat::Csv => write_field_csv(&grid, w),
                FieldFormat::Binary => write_field_binary(&grid, w),
            })?;
            let coeff_path = a.out.join(format!("coeffs_t{k}.csv"));
            emit(Some(&coeff_path), |w| write_coefficients_csv(&cs, k, w))?;
            outputs.push(field_path);
            outputs.push(coeff_path);
        }
    }
    Ok(RunRecord {
        config: Some(cfg),
        outputs,
        seed: Some(a.seed),
        manifest_path: Some(a.out.join("manifest.json")),
    })
}

#[derive(Serialize)]
struct MemorySummary<'a> {
    classification: crate::covariance::MemoryClass,
    origin_exponent: Option<f64>,
    decay: Option<crate::covariance::DecayDiagnostic>,
    t: f64,
    gamma: f64,
    h_max: f64,
    integral_at_h_max: f64,
    integral_csv: &'a str,
}

fn cmd_memory(a: MemoryArgs, config_override: Option<ModelConfig>) -> CliResult<RunRecord> {
    let cfg = load_config(&a.config, config_override)?;
    let report = memory_report(&cfg.measure, &cfg.params, a.t, a.hmax, a.gamma, a.h_step)?;
    fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    let csv_path = a.out.join("memory_integral.csv");
    emit(Some(&csv_path), |w| {
        writeln!(w, "H,cumulative")?;
        for (h, v) in &report.integrated_abs_cov {
            writeln!(w, "{h},{v}")?;
        }
        Ok(())
    })?;
    let summary = MemorySummary {
        classification: report.classification,
        origin_exponent: report.origin_exponent,
        decay: report.decay,
        t: a.t,
        gamma: a.gamma,
        h_max: a.hmax,
        integral_at_h_max: report.integrated_abs_cov.last().map(|p| p.1).unwrap_or(0.0),
        integral_csv: "memory_integral.csv",
    };
    let json_path = a.out.join("memory_report.json");
    emit(Some(&json_path), |w| {
        serde_json::to_writer_pretty(&mut *w, &summary).map_err(io::Error::from)?;
        writeln!(w)
    })?;
    Ok(RunRecord {
        config: Some(cfg),
        outputs: vec![json_path, csv_path],
        seed: None,
        manifest_path: Some(a.out.join("manifest.json")),
    })
}

fn cmd_entropy1d(a: EntropyArgs) -> CliResult<RunRecord> {
    let experiment: Experiment = a.experiment.parse()?;
    if !(a.dt > 0.0 && a.t_max >= 0.0) {
        return Err(CliError::Usage("--dt must be positive and --t-max nonnegative".into()));
    }
    let steps = (a.t_max / a.dt + 1e-9).floor() as usize;
    let opts = ExperimentOptions {
        half_length: a.half_length,
        n_modes: a.n_modes,
        width: a.width,
        wave_mode: a.wave_mode,
        times: (0..=steps).map(|i| i as f64 * a.dt).collect(),
        snapshot_times: a.snapshots.clone(),
        n_intervals: a.n_intervals,
    };
    let result = run_experiment(experiment, &opts)?;
    fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    let trace_path = a.out.join("entropy_trace.csv");
    emit(Some(&trace_path), |w| {
        writeln!(w, "t,S,computable")?;
        for (t, s) in result.trace.times.iter().zip(&result.trace.entropy) {
            match s {
                Some(s) => writeln!(w, "{t},{s},1")?,
                None => writeln!(w, "{t},NaN,0")?,
            }
        }
        Ok(())
    })?;
    let snap_path = a.out.join("snapshots.csv");
    emit(Some(&snap_path), |w| {
        writeln!(w, "t,x,q")?;
        for (t, profile) in &result.snapshots {
            for (x, q) in profile {
                writeln!(w, "{t},{x},{q}")?;
            }
        }
        Ok(())
    })?;
    let mut outputs = vec![trace_path, snap_path];
    if experiment == Experiment::PointSource {
        let front_path = a.out.join("front.csv");
        emit(Some(&front_path), |w| {
            writeln!(w, "t,x_front")?;
            for (t, x) in &result.fronts {
                writeln!(w, "{t},{x}")?;
            }
            Ok(())
        })?;
        outputs.push(front_path);
    }
    Ok(RunRecord { config: None, outputs, seed: None, manifest_path: Some(a.out.join("manifest.json")) })
}
