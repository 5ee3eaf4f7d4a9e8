//! Skipping engine: the NoI is simulated against each interferer by walking
//! the pair's chain of predicted points.

use std::collections::HashSet;
use std::fmt;

use crate::ble::NetworkConfig;
use crate::engine::{seed_first_events, EngineStats, HeadHook, Schedule, Scheduler, SimEvent, SimTime, Simulator};
use crate::error::SimError;

use super::oracle::{joint_period_h, oracle_next_overlap};
use super::pair::pair_window;
use super::{predict_pair, Mode, PairPrediction, PairState};

/// One prediction made during a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionTrace {
    pub time: SimTime,
    pub network: u32,
    pub net_index: u64,
    pub noi_index: u64,
    pub phi: i64,
    pub t_l: i64,
    pub t_h: i64,
    pub gamma: i64,
    pub mode: Mode,
    pub case: &'static str,
    /// `(k_net, k_noi)`; `None` for the never-collide sentinel.
    pub steps: Option<(u64, u64)>,
}

impl fmt::Display for PredictionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} net={} i={} j={} phi={} tl={} th={} gamma={} mode={} case={}",
            self.time, self.network, self.net_index, self.noi_index, self.phi, self.t_l, self.t_h, self.gamma,
            self.mode, self.case
        )?;
        match self.steps {
            Some((k_net, k_noi)) => write!(f, " k_net={k_net} k_noi={k_noi}"),
            None => f.write_str(" k_net=inf k_noi=inf"),
        }
    }
}

/// Head hook of the skipping engine.
#[derive(Debug)]
pub struct SkipManager {
    noi: u32,
    pairs: Vec<Option<PairState>>,
    scheduled_noi: HashSet<u64>,
    oracle_guard: bool,
    trace: Option<Vec<PredictionTrace>>,
    predictions: u64,
}

impl SkipManager {
    /// Every pair needs `min(T_n, T_NoI) > 2·d`.
    pub fn new(networks: &[NetworkConfig], noi: u32) -> Result<Self, SimError> {
        let noi_net = networks
            .get(noi as usize)
            .ok_or_else(|| SimError::InvalidConfig(format!("NoI {noi} out of range")))?;
        let mut pairs = Vec::with_capacity(networks.len());
        for net in networks {
            if net.id == noi {
                pairs.push(None);
                continue;
            }
            let d = pair_window(net, noi_net) as u64;
            if net.interval.min(noi_net.interval) <= 2 * d {
                return Err(SimError::InvalidConfig(format!(
                    "network {} and NoI: shorter interval must exceed twice the connection event ({d} us)",
                    net.id
                )));
            }
            pairs.push(Some(PairState {
                network: net.id,
                net_index: 0,
                noi_index: 0,
            }));
        }
        Ok(Self {
            noi,
            pairs,
            scheduled_noi: HashSet::new(),
            oracle_guard: false,
            trace: None,
            predictions: 0,
        })
    }

    /// Checks every prediction against the brute-force oracle.
    pub fn with_oracle_guard(mut self, on: bool) -> Self {
        self.oracle_guard = on;
        self
    }

    /// Records a [`PredictionTrace`] per prediction.
    pub fn with_trace(mut self, on: bool) -> Self {
        self.trace = on.then(Vec::new);
        self
    }

    pub fn noi(&self) -> u32 {
        self.noi
    }

    pub fn predictions(&self) -> u64 {
        self.predictions
    }

    pub fn trace(&self) -> &[PredictionTrace] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Seeds the first connection event of every network and aligns each
    /// pair so that later predictions only move forward in time.
    pub fn initialize(&mut self, sim: &mut Simulator) -> Result<(), SimError> {
        seed_first_events(sim)?;
        self.scheduled_noi.insert(0);
        for n in 0..sim.networks().len() as u32 {
            self.step_pair(n, sim, true)?;
        }
        Ok(())
    }

    fn step_pair(&mut self, n: u32, sink: &mut dyn Schedule, align_only: bool) -> Result<(), SimError> {
        let noi = self.noi;
        let net_cfg = sink.networks()[n as usize].clone();
        let noi_cfg = sink.networks()[noi as usize].clone();
        let (net_last, noi_last) = (sink.last_event(n), sink.last_event(noi));
        loop {
            let Some(state) = self.pairs[n as usize] else {
                return Ok(());
            };
            let pp = predict_pair(&state, &net_cfg, &noi_cfg);
            if align_only && pp.prediction.case != "align" {
                return Ok(());
            }
            self.predictions += 1;
            if self.oracle_guard && pp.prediction.case != "align" {
                check_against_oracle(&state, &pp, &net_cfg, &noi_cfg)?;
            }
            if let Some(trace) = &mut self.trace {
                trace.push(PredictionTrace {
                    time: sink.now(),
                    network: n,
                    net_index: state.net_index,
                    noi_index: state.noi_index,
                    phi: pp.phi,
                    t_l: pp.gamma.t_l,
                    t_h: pp.gamma.t_h,
                    gamma: pp.gamma.gamma,
                    mode: pp.gamma.mode,
                    case: pp.prediction.case,
                    steps: pp.steps,
                });
            }
            let Some((k_net, k_noi)) = pp.steps else {
                self.pairs[n as usize] = None;
                return Ok(());
            };
            let net_index = state.net_index + k_net;
            let noi_index = state.noi_index + k_noi;
            if net_index > net_last || noi_index > noi_last {
                self.pairs[n as usize] = None;
                return Ok(());
            }
            if k_noi > 0 && self.scheduled_noi.insert(noi_index) {
                sink.schedule(noi, noi_index)?;
            }
            self.pairs[n as usize] = Some(PairState {
                network: n,
                net_index,
                noi_index,
            });
            if k_net > 0 {
                sink.schedule(n, net_index)?;
                return Ok(());
            }
        }
    }
}

fn check_against_oracle(
    state: &PairState,
    pp: &PairPrediction,
    net: &NetworkConfig,
    noi: &NetworkConfig,
) -> Result<(), SimError> {
    let g = &pp.gamma;
    let d = pair_window(net, noi);
    let (max_h, expected) = match pp.prediction.counts() {
        Some((k_l, k_h)) => (k_h, Some((k_l, k_h))),
        None => (joint_period_h(g.t_l as u64, g.t_h as u64) + 1, None),
    };
    let first = oracle_next_overlap(pp.phi, g.t_l, g.t_h, d, max_h);
    let safe = match (first, expected) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some((a, b)), Some((k_l, k_h))) => a >= k_l && b >= k_h,
    };
    if safe {
        Ok(())
    } else {
        Err(SimError::UnsafePrediction(format!(
            "network {} at ({}, {}): phi={} tl={} th={} case={} predicted {:?}, first overlap {:?}",
            state.network,
            state.net_index,
            state.noi_index,
            pp.phi,
            g.t_l,
            g.t_h,
            pp.prediction.case,
            expected,
            first
        )))
    }
}

impl HeadHook for SkipManager {
    fn on_head(&mut self, sched: &mut Scheduler<'_>, head: &SimEvent) -> Result<(), SimError> {
        if head.network == self.noi {
            return Ok(());
        }
        match self.pairs[head.network as usize] {
            Some(state) if state.net_index == head.conn_event => {}
            _ => return Ok(()),
        }
        self.step_pair(head.network, sched, false)
    }
}

/// Runs the skipping engine for `noi` up to `horizon`.
pub fn run_skipping(
    networks: Vec<NetworkConfig>,
    horizon: SimTime,
    noi: u32,
) -> Result<(EngineStats, SkipManager), SimError> {
    let mut manager = SkipManager::new(&networks, noi)?;
    let mut sim = Simulator::new(networks, horizon)?;
    manager.initialize(&mut sim)?;
    sim.run(&mut manager)?;
    Ok((sim.into_stats(), manager))
}
