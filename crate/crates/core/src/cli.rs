//! Command line, configuration files and CSV persistence.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 verification
//! mismatch or simulation failure, 3 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::error::SimError;
use crate::montecarlo::{
    run_sweep, Engine, ExperimentConfig, HorizonPolicy, RunMode, RunResult, RunRow, SweepOutput, SweepRow,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Default output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "CYCLESIM_OUT_DIR";

pub const RUNS_FILE: &str = "runs_v1.csv";
pub const SWEEP_FILE: &str = "sweep_v1.csv";
pub const TRACE_FILE: &str = "trace_v1.log";
pub const CONFIG_FILE: &str = "config.toml";

pub const RUNS_HEADER: [&str; 10] = [
    "k",
    "t_max_us",
    "repetition",
    "mode",
    "collisions",
    "packets",
    "collision_rate",
    "events_executed",
    "cpu_time_s",
    "seed",
];

pub const SWEEP_HEADER: [&str; 10] = [
    "k",
    "t_max_us",
    "runs",
    "speedup_min",
    "speedup_mean",
    "speedup_max",
    "event_reduction_min",
    "event_reduction_mean",
    "event_reduction_max",
    "mean_collision_rate",
];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Sim(SimError::InvalidConfig(_)) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Format { .. } => EXIT_IO,
            CliError::Sim(_) => EXIT_MISMATCH,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Parses `7500`, `7500us`, `7.5ms` or `1.25s` into microseconds.
pub fn parse_duration_us(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let (num, scale) = if let Some(v) = s.strip_suffix("ms") {
        (v, 1_000.0)
    } else if let Some(v) = s.strip_suffix("us") {
        (v, 1.0)
    } else if let Some(v) = s.strip_suffix('s') {
        (v, 1_000_000.0)
    } else {
        (s, 1.0)
    };
    if scale == 1.0 {
        if let Ok(v) = num.trim().parse::<u64>() {
            return Ok(v);
        }
    }
    let x: f64 = num.trim().parse().map_err(|_| format!("invalid duration {s:?}"))?;
    let us = x * scale;
    if !(0.0..=u64::MAX as f64).contains(&us) || (us - us.round()).abs() > 1e-6 {
        return Err(format!("duration {s:?} is not a whole number of microseconds"));
    }
    Ok(us.round() as u64)
}

/// Collision simulation of cyclic wireless networks with adaptive event
/// skipping.
#[derive(Debug, Parser)]
#[command(name = "cyclesim", version)]
pub struct Args {
    /// TOML file with experiment settings; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// baseline, skip or verify.
    #[arg(long)]
    pub mode: Option<RunMode>,
    /// Number of networks, NoI included
    #[arg(long)]
    pub networks: Option<usize>,
    /// Shortest connection interval (µs or e.g. 7.5ms).
    #[arg(long, value_parser = parse_duration_us)]
    pub tmin: Option<u64>,
    /// First T_max of the sweep; defaults to T_min.
    #[arg(long, value_parser = parse_duration_us)]
    pub tmax_start: Option<u64>,
    /// Last T_max of the sweep.
    #[arg(long, value_parser = parse_duration_us)]
    pub tmax: Option<u64>,
    /// T_max increment.
    #[arg(long, value_parser = parse_duration_us)]
    pub step: Option<u64>,
    /// Repetitions per T_max.
    #[arg(long)]
    pub reps: Option<u32>,
    /// Channels used for hopping
    #[arg(long)]
    pub channels: Option<u32>,
    /// Hop increment.
    #[arg(long)]
    pub hop: Option<u32>,
    /// NoI rank by descending interval (1 = longest).
    #[arg(long)]
    pub noi_rank: Option<usize>,
    /// Master seed of the sweep
    #[arg(long)]
    pub seed: Option<u64>,
    /// optimal or capped.
    #[arg(long, value_parser = parse_policy)]
    pub horizon: Option<HorizonPolicy>,
    /// Horizon cap (capped) or limit above which scenarios are skipped (optimal).
    #[arg(long, value_parser = parse_duration_us)]
    pub horizon_cap: Option<u64>,
    /// Skip scenarios whose baseline run exceeds this many events.
    #[arg(long)]
    pub max_events: Option<u64>,
    /// Output directory; defaults to $CYCLESIM_OUT_DIR or the current directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-prediction trace lines of skipping runs.
    #[arg(long)]
    pub trace: bool,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

fn parse_policy(s: &str) -> Result<HorizonPolicy, String> {
    match s {
        "optimal" => Ok(HorizonPolicy::Optimal),
        "capped" => Ok(HorizonPolicy::Capped),
        _ => Err(format!("unknown horizon policy {s:?}")),
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Canonical TOML form of a configuration.
pub fn config_to_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("configuration serializes")
}

/// Merges config file and flags into a validated configuration.
pub fn build_config(args: &Args) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    macro_rules! set {
        ($flag:ident => $field:ident) => {
            if let Some(v) = args.$flag.clone() {
                cfg.$field = v;
            }
        };
    }
    set!(mode => mode);
    set!(networks => networks);
    set!(tmin => t_min_us);
    set!(tmax_start => t_max_start_us);
    set!(tmax => t_max_end_us);
    set!(step => t_max_step_us);
    set!(reps => reps);
    set!(channels => channels);
    set!(hop => hop);
    set!(noi_rank => noi_rank);
    set!(seed => seed);
    set!(horizon => horizon);
    if args.horizon_cap.is_some() {
        cfg.horizon_cap_us = args.horizon_cap;
    }
    if args.max_events.is_some() {
        cfg.max_events = args.max_events;
    }
    cfg.trace |= args.trace;
    if args.tmax_start.is_none() && cfg.t_max_start_us < cfg.t_min_us {
        cfg.t_max_start_us = cfg.t_min_us;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

/// Parses a full argument vector (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<(Args, ExperimentConfig), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg = build_config(&args)?;
    Ok((args, cfg))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

pub fn write_runs(path: &Path, rows: &[RunRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(RUNS_HEADER).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.t_max.to_string(),
            r.repetition.to_string(),
            r.engine.label().to_string(),
            r.result.collisions.to_string(),
            r.result.packets.to_string(),
            r.result.collision_rate.to_string(),
            r.result.events_executed.to_string(),
            r.result.cpu_time_s.to_string(),
            r.seed.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(SWEEP_HEADER).map_err(|e| csv_error(path, e))?;
    for r in rows {
        let (s0, s1, s2) = split3(r.speedup);
        let (e0, e1, e2) = split3(r.event_reduction);
        w.write_record([
            r.k.to_string(),
            r.t_max.to_string(),
            r.runs.to_string(),
            opt(s0),
            opt(s1),
            opt(s2),
            opt(e0),
            opt(e1),
            opt(e2),
            opt(r.mean_collision_rate),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn split3(x: Option<(f64, f64, f64)>) -> (Option<f64>, Option<f64>, Option<f64>) {
    match x {
        Some((a, b, c)) => (Some(a), Some(b), Some(c)),
        None => (None, None, None),
    }
}

/// Reads a per-run file written by [`write_runs`].
pub fn read_runs(path: &Path) -> Result<Vec<RunRow>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(RUNS_HEADER) {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: "unexpected header".into(),
        });
    }
    let bad = |m: String| CliError::Format {
        path: path.to_path_buf(),
        message: m,
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let int = |i: usize| f(i).parse::<u64>().map_err(|e| bad(format!("column {}: {e}", RUNS_HEADER[i])));
        let float = |i: usize| f(i).parse::<f64>().map_err(|e| bad(format!("column {}: {e}", RUNS_HEADER[i])));
        let engine = match f(3) {
            "baseline" => Engine::Baseline,
            "skip" => Engine::Skipping,
            other => return Err(bad(format!("unknown mode {other:?}"))),
        };
        rows.push(RunRow {
            k: int(0)?,
            t_max: int(1)?,
            repetition: int(2)? as u32,
            engine,
            result: RunResult {
                collisions: int(4)?,
                packets: int(5)?,
                collision_rate: float(6)?,
                events_executed: int(7)?,
                cpu_time_s: float(8)?,
            },
            seed: int(9)?,
        });
    }
    Ok(rows)
}

/// Writes the per-run and per-sweep files (and the trace, if any) into `dir`.
pub fn emit_results(out: &SweepOutput, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_runs(&dir.join(RUNS_FILE), &out.rows)?;
    write_sweep(&dir.join(SWEEP_FILE), &out.sweep)?;
    if !out.trace.is_empty() {
        let path = dir.join(TRACE_FILE);
        let mut f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        for line in &out.trace {
            writeln!(f, "{line}").map_err(|e| CliError::io(&path, e))?;
        }
    }
    Ok(())
}

fn out_dir(args: &Args) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run_args(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_args(args: &Args) -> Result<i32, CliError> {
    let cfg = build_config(args)?;
    if args.print_config {
        print!("{}", config_to_toml(&cfg));
        return Ok(EXIT_OK);
    }
    let out = run_sweep(&cfg)?;
    let dir = out_dir(args);
    emit_results(&out, &dir)?;
    let cfg_path = dir.join(CONFIG_FILE);
    fs::write(&cfg_path, config_to_toml(&cfg)).map_err(|e| CliError::io(&cfg_path, e))?;
    for s in &out.sweep {
        println!(
            "k={} t_max={}us runs={} collision_rate={} event_reduction={} speedup={}",
            s.k,
            s.t_max,
            s.runs,
            opt(s.mean_collision_rate),
            opt(s.event_reduction.map(|x| x.1)),
            opt(s.speedup.map(|x| x.1)),
        );
    }
    if !out.skipped.is_empty() {
        println!("skipped {} scenario(s)", out.skipped.len());
    }
    if cfg.mode == RunMode::Verify {
        if out.mismatches.is_empty() {
            println!("verify: all {} scenario(s) equal", out.rows.len() / 2);
        } else {
            for (k, rep, dump) in &out.mismatches {
                eprintln!("mismatch at k={k} rep={rep}\n{dump}");
            }
            return Ok(EXIT_MISMATCH);
        }
    }
    Ok(EXIT_OK)
}
