//! Randomized experiments: scenario drawing, single runs in either engine,
//! equivalence checks and `T_max` sweeps.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ble::{optimal_sim_duration, NetworkConfig, INTERVAL_GRID_US, MAX_CONN_INTERVAL_US};
use crate::engine::{seed_first_events, Baseline, EngineStats, PacketId, SimTime, Simulator};
use crate::error::SimError;
use crate::skip::{total_packets, PredictionTrace, SkipManager};

/// Which engines a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Baseline,
    Skip,
    /// Both engines, results cross-checked.
    Verify,
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Baseline => "baseline",
            RunMode::Skip => "skip",
            RunMode::Verify => "verify",
        })
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(RunMode::Baseline),
            "skip" | "skipping" => Ok(RunMode::Skip),
            "verify" => Ok(RunMode::Verify),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

/// A single engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Baseline,
    Skipping,
}

impl Engine {
    pub fn label(self) -> &'static str {
        match self {
            Engine::Baseline => "baseline",
            Engine::Skipping => "skip",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HorizonPolicy {
    /// One hyperperiod plus the longest connection event. With
    /// `horizon_cap_us` set, scenarios above the cap are skipped.
    Optimal,
    /// The optimal horizon truncated to `horizon_cap_us`.
    Capped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub networks: usize,
    pub t_min_us: u64,
    pub t_max_start_us: u64,
    pub t_max_end_us: u64,
    pub t_max_step_us: u64,
    pub reps: u32,
    pub channels: u32,
    pub hop: u32,
    pub n_pkg_m: u64,
    pub n_pkg_s: u64,
    pub d_ifs_us: u64,
    /// Rank of the NoI by descending interval, 1-based.
    pub noi_rank: usize,
    pub seed: u64,
    pub mode: RunMode,
    pub horizon: HorizonPolicy,
    pub horizon_cap_us: Option<u64>,
    /// Scenarios whose baseline run would execute more events are skipped.
    pub max_events: Option<u64>,
    /// Record per-prediction trace lines of skipping runs.
    pub trace: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            networks: 3,
            t_min_us: 7_500,
            t_max_start_us: 7_500,
            t_max_end_us: 7_500,
            t_max_step_us: INTERVAL_GRID_US,
            reps: 1,
            channels: 2,
            hop: 1,
            n_pkg_m: 37,
            n_pkg_s: 37,
            d_ifs_us: 150,
            noi_rank: 1,
            seed: 0,
            mode: RunMode::Verify,
            horizon: HorizonPolicy::Optimal,
            horizon_cap_us: None,
            max_events: None,
            trace: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if self.networks < 2 {
            return bad(format!("need at least 2 networks, got {}", self.networks));
        }
        if self.noi_rank < 1 || self.noi_rank > self.networks {
            return bad(format!("NoI rank {} outside 1..={}", self.noi_rank, self.networks));
        }
        for (name, v) in [
            ("T_min", self.t_min_us),
            ("T_max start", self.t_max_start_us),
            ("T_max end", self.t_max_end_us),
            ("T_max step", self.t_max_step_us),
        ] {
            if v == 0 || v % INTERVAL_GRID_US != 0 {
                return bad(format!("{name} = {v} us is not a positive multiple of {INTERVAL_GRID_US} us"));
            }
        }
        if !(self.t_min_us <= self.t_max_start_us && self.t_max_start_us <= self.t_max_end_us) {
            return bad("need T_min <= T_max start <= T_max end".into());
        }
        if self.t_max_end_us > MAX_CONN_INTERVAL_US {
            return bad(format!("T_max end exceeds {MAX_CONN_INTERVAL_US} us"));
        }
        if self.channels == 0 {
            return bad("need at least one channel".into());
        }
        if self.channels > 1 && (self.hop == 0 || self.hop >= self.channels) {
            return bad(format!("hop increment {} must lie in [1, {})", self.hop, self.channels));
        }
        if self.n_pkg_m == 0 {
            return bad("master packet must carry at least one byte".into());
        }
        if self.horizon == HorizonPolicy::Capped && self.horizon_cap_us.is_none() {
            return bad("capped horizon needs horizon_cap_us".into());
        }
        Ok(())
    }

    /// The `T_max` grid points of the sweep.
    pub fn t_max_points(&self) -> Vec<u64> {
        (self.t_max_start_us..=self.t_max_end_us)
            .step_by(self.t_max_step_us as usize)
            .collect()
    }

    fn network_template(&self, id: u32, interval: u64, offset: u64, channel: u32) -> NetworkConfig {
        NetworkConfig::new(id, interval, offset)
            .with_packets(self.n_pkg_m, self.n_pkg_s, self.d_ifs_us)
            .with_hopping(self.hop, self.channels, channel)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    /// Sorted by descending interval; `networks[i].id == i`.
    pub networks: Vec<NetworkConfig>,
    pub noi: u32,
    pub horizon: SimTime,
}

impl Scenario {
    /// Events the baseline engine executes on this scenario.
    pub fn baseline_events(&self) -> u64 {
        self.networks
            .iter()
            .map(|n| total_packets(self.horizon.0, n.interval) * 4 * n.shape().packets_per_event())
            .sum()
    }

    /// NoI packets over the horizon.
    pub fn noi_packets(&self) -> u64 {
        let noi = &self.networks[self.noi as usize];
        total_packets(self.horizon.0, noi.interval) * noi.shape().packets_per_event()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of repetition `rep` at sweep point `k`: `seed ⊕ splitmix64(splitmix64(k) ⊕ rep)`.
pub fn stream_seed(seed: u64, k: u64, rep: u64) -> u64 {
    seed ^ splitmix64(splitmix64(k) ^ rep)
}

pub fn scenario_rng(seed: u64, k: u64, rep: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, k, rep))
}

/// Draws intervals, offsets and initial channels for one repetition and
/// fixes the horizon according to the policy.
pub fn draw_scenario(rng: &mut impl Rng, cfg: &ExperimentConfig, t_max: u64) -> Result<Scenario, SimError> {
    let lo = cfg.t_min_us / INTERVAL_GRID_US;
    let hi = t_max / INTERVAL_GRID_US;
    let mut intervals: Vec<u64> = (0..cfg.networks)
        .map(|_| rng.random_range(lo..=hi) * INTERVAL_GRID_US)
        .collect();
    intervals.sort_unstable_by(|a, b| b.cmp(a));
    let noi = (cfg.noi_rank - 1) as u32;
    let networks: Vec<NetworkConfig> = intervals
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let channel = rng.random_range(0..cfg.channels);
            let mut net = cfg.network_template(i as u32, t, 0, channel);
            net.offset = if i as u32 == noi {
                net.shape().duration()
            } else {
                rng.random_range(0..=t)
            };
            net
        })
        .collect();
    let optimal = optimal_sim_duration(&networks, cfg.hop, cfg.channels);
    let horizon = match (cfg.horizon, cfg.horizon_cap_us) {
        (HorizonPolicy::Optimal, None) => optimal?,
        (HorizonPolicy::Optimal, Some(limit)) => match optimal {
            Ok(h) if h.0 <= limit => h,
            Ok(h) => return Err(SimError::HorizonLimit { horizon: h.0, limit }),
            Err(SimError::HorizonOverflow) => return Err(SimError::HorizonLimit { horizon: u64::MAX, limit }),
            Err(e) => return Err(e),
        },
        (HorizonPolicy::Capped, cap) => {
            let cap = cap.unwrap_or(u64::MAX);
            match optimal {
                Ok(h) => SimTime(h.0.min(cap)),
                Err(SimError::HorizonOverflow) => SimTime(cap),
                Err(e) => return Err(e),
            }
        }
    };
    Ok(Scenario {
        networks,
        noi,
        horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunResult {
    pub collisions: u64,
    pub packets: u64,
    pub collision_rate: f64,
    pub events_executed: u64,
    /// Thread CPU time of the processing loop.
    pub cpu_time_s: f64,
}

impl RunResult {
    fn new(collisions: u64, packets: u64, events_executed: u64, cpu_time_s: f64) -> Self {
        Self {
            collisions,
            packets,
            collision_rate: if packets == 0 { 0.0 } else { collisions as f64 / packets as f64 },
            events_executed,
            cpu_time_s,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Abort after this many events.
    pub event_budget: Option<u64>,
    pub trace: bool,
    /// Check every skip prediction against the brute-force oracle.
    pub oracle_guard: bool,
    /// Keep identities of collided NoI packets.
    pub track_noi: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: RunResult,
    pub stats: EngineStats,
    pub trace: Vec<PredictionTrace>,
}

/// Runs one engine on `scenario` up to its horizon.
pub fn run_single(scenario: &Scenario, engine: Engine, opts: &RunOptions) -> Result<RunOutcome, SimError> {
    let mut sim = Simulator::new(scenario.networks.clone(), scenario.horizon)?.with_event_budget(opts.event_budget);
    if opts.track_noi {
        sim = sim.track_packets_of(scenario.noi);
    }
    let noi = scenario.noi;
    let (cpu, manager) = match engine {
        Engine::Baseline => {
            seed_first_events(&mut sim)?;
            let start = cpu_time::ThreadTime::now();
            sim.run(&mut Baseline)?;
            (start.elapsed(), None)
        }
        Engine::Skipping => {
            let mut manager = SkipManager::new(&scenario.networks, noi)?
                .with_trace(opts.trace)
                .with_oracle_guard(opts.oracle_guard);
            manager.initialize(&mut sim)?;
            let start = cpu_time::ThreadTime::now();
            sim.run(&mut manager)?;
            (start.elapsed(), Some(manager))
        }
    };
    let stats = sim.into_stats();
    let packets = match engine {
        Engine::Baseline => stats.ledger.transmitted(noi),
        Engine::Skipping => scenario.noi_packets(),
    };
    let result = RunResult::new(stats.ledger.collided(noi), packets, stats.events_executed, cpu.as_secs_f64());
    let trace = manager.map(|m| m.trace().to_vec()).unwrap_or_default();
    Ok(RunOutcome { result, stats, trace })
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub baseline: RunResult,
    pub skipping: RunResult,
    pub equal: bool,
    /// First point of divergence and the relevant prediction trace.
    pub divergence: Option<String>,
}

/// Runs both engines and compares NoI collisions and packet counts.
pub fn verify_equivalence(scenario: &Scenario, opts: &RunOptions) -> Result<VerifyReport, SimError> {
    let opts = RunOptions {
        track_noi: true,
        ..opts.clone()
    };
    let base = run_single(scenario, Engine::Baseline, &opts)?;
    let skip = run_single(scenario, Engine::Skipping, &opts)?;
    let equal = base.result.collisions == skip.result.collisions && base.result.packets == skip.result.packets;
    let divergence = if equal {
        None
    } else {
        let traced = run_single(
            scenario,
            Engine::Skipping,
            &RunOptions {
                trace: true,
                ..opts.clone()
            },
        )?;
        Some(divergence_dump(scenario, &base, &skip, &traced.trace))
    };
    Ok(VerifyReport {
        baseline: base.result,
        skipping: skip.result,
        equal,
        divergence,
    })
}

fn divergence_dump(scenario: &Scenario, base: &RunOutcome, skip: &RunOutcome, trace: &[PredictionTrace]) -> String {
    use std::fmt::Write;
    let a = base.stats.ledger.tracked_collisions();
    let b = skip.stats.ledger.tracked_collisions();
    let first: Option<(PacketId, &str)> = a
        .iter()
        .filter(|p| b.binary_search(p).is_err())
        .map(|p| (*p, "baseline only"))
        .chain(b.iter().filter(|p| a.binary_search(p).is_err()).map(|p| (*p, "skip only")))
        .min_by_key(|(p, _)| *p);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "collisions baseline={} skip={}, packets baseline={} skip={}",
        base.result.collisions, skip.result.collisions, base.result.packets, skip.result.packets
    );
    for n in &scenario.networks {
        let _ = writeln!(
            out,
            "  net {} T={} offset={} ch0={}{}",
            n.id,
            n.interval,
            n.offset,
            n.initial_channel,
            if n.id == scenario.noi { " (NoI)" } else { "" }
        );
    }
    if let Some((p, side)) = first {
        let t = scenario.networks[p.network as usize].anchor(p.conn_event);
        let _ = writeln!(out, "first differing NoI collision: event {} {:?} at {t} ({side})", p.conn_event, p.role);
        let window = 4 * scenario.networks.iter().map(|n| n.interval).max().unwrap_or(0);
        for line in trace.iter().filter(|l| l.time.0.abs_diff(t.0) <= window) {
            let _ = writeln!(out, "  {line}");
        }
    }
    out
}

/// One per-run row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub k: u64,
    pub t_max: u64,
    pub repetition: u32,
    pub engine: Engine,
    pub result: RunResult,
    pub seed: u64,
}

/// Aggregates of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: u64,
    pub t_max: u64,
    pub runs: u32,
    /// `(min, mean, max)` of baseline ÷ skipping CPU time.
    pub speedup: Option<(f64, f64, f64)>,
    /// `(min, mean, max)` of baseline ÷ skipping executed events.
    pub event_reduction: Option<(f64, f64, f64)>,
    pub mean_collision_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRun {
    pub k: u64,
    pub repetition: u32,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub rows: Vec<RunRow>,
    pub sweep: Vec<SweepRow>,
    pub skipped: Vec<SkippedRun>,
    /// Verify-mode divergences, `(k, repetition, dump)`.
    pub mismatches: Vec<(u64, u32, String)>,
    /// Trace lines of skipping runs, prefixed with `k` and repetition.
    pub trace: Vec<String>,
}

struct JobResult {
    rows: Vec<RunRow>,
    skipped: Option<SkippedRun>,
    mismatch: Option<String>,
    trace: Vec<String>,
}

fn run_job(cfg: &ExperimentConfig, k: u64, t_max: u64, rep: u32) -> Result<JobResult, SimError> {
    let seed = stream_seed(cfg.seed, k, rep as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let skip = |reason: String| {
        log::warn!("k={k} rep={rep}: skipped: {reason}");
        Ok(JobResult {
            rows: Vec::new(),
            skipped: Some(SkippedRun {
                k,
                repetition: rep,
                reason,
            }),
            mismatch: None,
            trace: Vec::new(),
        })
    };
    let scenario = match draw_scenario(&mut rng, cfg, t_max) {
        Ok(s) => s,
        Err(e @ (SimError::HorizonOverflow | SimError::HorizonLimit { .. })) => return skip(e.to_string()),
        Err(e) => return Err(e),
    };
    if cfg.mode != RunMode::Skip {
        if let Some(max) = cfg.max_events {
            let events = scenario.baseline_events();
            if events > max {
                return skip(format!("baseline would execute {events} events (limit {max})"));
            }
        }
    }
    let opts = RunOptions {
        trace: cfg.trace,
        ..RunOptions::default()
    };
    let row = |engine, result| RunRow {
        k,
        t_max,
        repetition: rep,
        engine,
        result,
        seed,
    };
    let mut out = JobResult {
        rows: Vec::new(),
        skipped: None,
        mismatch: None,
        trace: Vec::new(),
    };
    let keep_trace = |t: &[PredictionTrace], out: &mut JobResult| {
        out.trace.extend(t.iter().map(|l| format!("k={k} rep={rep} {l}")));
    };
    match cfg.mode {
        RunMode::Baseline => {
            let r = run_single(&scenario, Engine::Baseline, &opts)?;
            out.rows.push(row(Engine::Baseline, r.result));
        }
        RunMode::Skip => {
            let r = run_single(&scenario, Engine::Skipping, &opts)?;
            keep_trace(&r.trace, &mut out);
            out.rows.push(row(Engine::Skipping, r.result));
        }
        RunMode::Verify => {
            let base = run_single(
                &scenario,
                Engine::Baseline,
                &RunOptions {
                    track_noi: true,
                    ..opts.clone()
                },
            )?;
            let skip = run_single(
                &scenario,
                Engine::Skipping,
                &RunOptions {
                    track_noi: true,
                    ..opts.clone()
                },
            )?;
            keep_trace(&skip.trace, &mut out);
            if base.result.collisions != skip.result.collisions || base.result.packets != skip.result.packets {
                let traced = run_single(
                    &scenario,
                    Engine::Skipping,
                    &RunOptions {
                        trace: true,
                        ..opts.clone()
                    },
                )?;
                out.mismatch = Some(divergence_dump(&scenario, &base, &skip, &traced.trace));
            }
            out.rows.push(row(Engine::Baseline, base.result));
            out.rows.push(row(Engine::Skipping, skip.result));
        }
    }
    Ok(out)
}

fn min_mean_max(xs: &[f64]) -> Option<(f64, f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    Some((min, mean.clamp(min, max), max))
}

/// Folds per-run rows (ordered by `k`, repetition, engine) into per-point
/// aggregates. Speedups with a zero skipping CPU time are left out.
pub fn aggregate(rows: &[RunRow]) -> Vec<SweepRow> {
    let mut out: Vec<SweepRow> = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let (k, t_max) = (rows[i].k, rows[i].t_max);
        let j = i + rows[i..].iter().take_while(|r| r.k == k).count();
        let group = &rows[i..j];
        let mut speedups = Vec::new();
        let mut reductions = Vec::new();
        let mut rates = Vec::new();
        let mut reps = Vec::new();
        for r in group {
            if reps.last() != Some(&r.repetition) {
                reps.push(r.repetition);
                rates.push(r.result.collision_rate);
            }
        }
        for pair in group.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.repetition == b.repetition && a.engine == Engine::Baseline && b.engine == Engine::Skipping {
                if b.result.events_executed > 0 {
                    reductions.push(a.result.events_executed as f64 / b.result.events_executed as f64);
                }
                if b.result.cpu_time_s > 0.0 {
                    speedups.push(a.result.cpu_time_s / b.result.cpu_time_s);
                }
            }
        }
        let mean_rate = (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64);
        out.push(SweepRow {
            k,
            t_max,
            runs: reps.len() as u32,
            speedup: min_mean_max(&speedups),
            event_reduction: min_mean_max(&reductions),
            mean_collision_rate: mean_rate,
        });
        i = j;
    }
    out
}

/// Runs every `(T_max[k], repetition)` job in parallel and aggregates in
/// `(k, repetition)` order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput, SimError> {
    cfg.validate()?;
    let jobs: Vec<(u64, u64, u32)> = cfg
        .t_max_points()
        .into_iter()
        .enumerate()
        .flat_map(|(k, t)| (0..cfg.reps).map(move |rep| (k as u64, t, rep)))
        .collect();
    let results: Vec<Result<JobResult, SimError>> =
        jobs.par_iter().map(|&(k, t, rep)| run_job(cfg, k, t, rep)).collect();
    let mut out = SweepOutput::default();
    for ((k, _, rep), res) in jobs.into_iter().zip(results) {
        let job = res?;
        out.rows.extend(job.rows);
        out.trace.extend(job.trace);
        if let Some(s) = job.skipped {
            out.skipped.push(s);
        }
        if let Some(m) = job.mismatch {
            log::error!("k={k} rep={rep}: engines disagree\n{m}");
            out.mismatches.push((k, rep, m));
        }
    }
    out.sweep = aggregate(&out.rows);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_seeds_differ() {
        assert_ne!(stream_seed(1, 0, 0), stream_seed(1, 0, 1));
        assert_ne!(stream_seed(1, 0, 1), stream_seed(1, 1, 0));
        assert_eq!(stream_seed(7, 3, 4), stream_seed(7, 3, 4));
    }

    #[test]
    fn single_grid_point() {
        let cfg = ExperimentConfig::default();
        let s = draw_scenario(&mut scenario_rng(1, 0, 0), &cfg, 7_500).unwrap();
        assert!(s.networks.iter().all(|n| n.interval == 7_500));
        assert_eq!(s.networks[0].offset, 742);
    }

    #[test]
    fn min_mean_max_of_one() {
        assert_eq!(min_mean_max(&[2.5]), Some((2.5, 2.5, 2.5)));
        assert_eq!(min_mean_max(&[]), None);
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.noi_rank = 4;
        assert!(cfg.validate().is_err());
        cfg.noi_rank = 1;
        cfg.t_max_end_us = 8_000;
        assert!(cfg.validate().is_err());
    }
}
