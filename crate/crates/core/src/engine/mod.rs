//! Next-event time-advance kernel.
//!
//! Events are ordered by timestamp and, among equal timestamps, by descending
//! delta-cycle rank. The ranks encode half-open packet intervals: at a shared
//! instant, end-of-packet work (check, then release) runs before
//! begin-of-packet work (access, then check), so back-to-back packets do not
//! collide.

mod channel;
mod ledger;
mod queue;

pub use channel::{ChannelList, Occupant};
pub use ledger::CollisionLedger;
pub use queue::EventQueue;

use std::cmp::Ordering;
use std::fmt;

use crate::ble::{ConnectionEventShape, NetworkConfig};
use crate::error::SimError;
use crate::skip::total_packets;

/// Simulated time in integer microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(pub u64);

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}µs", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PacketRole {
    Master,
    Slave,
}

/// Per-packet event phase. The discriminant is the delta-cycle rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    BeginCheck = 0,
    BeginAccess = 1,
    EndRelease = 2,
    EndCheck = 3,
}

impl Phase {
    pub fn delta(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventKind {
    pub phase: Phase,
    pub role: PacketRole,
}

impl EventKind {
    /// The master's channel access opens every connection event and doubles
    /// as the connection-event head.
    pub const HEAD: EventKind = EventKind::new(Phase::BeginAccess, PacketRole::Master);

    pub const fn new(phase: Phase, role: PacketRole) -> Self {
        Self { phase, role }
    }

    pub fn is_head(self) -> bool {
        self == Self::HEAD
    }
}

/// Identifies one packet of one connection event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketId {
    pub network: u32,
    pub conn_event: u64,
    pub role: PacketRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimEvent {
    pub time: SimTime,
    pub kind: EventKind,
    pub network: u32,
    pub conn_event: u64,
}

impl SimEvent {
    pub fn delta(&self) -> u8 {
        self.kind.phase.delta()
    }

    pub fn packet(&self) -> PacketId {
        PacketId {
            network: self.network,
            conn_event: self.conn_event,
            role: self.kind.role,
        }
    }

    fn key(&self) -> (SimTime, std::cmp::Reverse<u8>, u32, PacketRole, u64) {
        (
            self.time,
            std::cmp::Reverse(self.delta()),
            self.network,
            self.kind.role,
            self.conn_event,
        )
    }
}

/// Total execution order: earlier first, then higher delta first, then
/// network, packet role and connection-event index.
impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Statistics of one kernel run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineStats {
    pub events_executed: u64,
    pub ledger: CollisionLedger,
}

/// Called whenever a connection-event head executes. Decides which future
/// connection events get scheduled.
pub trait HeadHook {
    fn on_head(&mut self, sched: &mut Scheduler<'_>, head: &SimEvent) -> Result<(), SimError>;
}

/// Scheduling access shared by [`Simulator`] and [`Scheduler`].
pub trait Schedule {
    fn networks(&self) -> &[NetworkConfig];
    fn now(&self) -> SimTime;
    /// Index of the last connection event of `network` inside the horizon.
    fn last_event(&self, network: u32) -> u64;
    /// Enqueues the head of connection event `k`. Returns `false` when `k`
    /// lies beyond the network's horizon and nothing was scheduled.
    fn schedule(&mut self, network: u32, k: u64) -> Result<bool, SimError>;
}

/// Scheduling view handed to a [`HeadHook`].
pub struct Scheduler<'a> {
    queue: &'a mut EventQueue,
    networks: &'a [NetworkConfig],
    shapes: &'a [ConnectionEventShape],
    last_event: &'a [u64],
}

impl Schedule for Scheduler<'_> {
    fn networks(&self) -> &[NetworkConfig] {
        self.networks
    }

    fn now(&self) -> SimTime {
        self.queue.now()
    }

    fn last_event(&self, network: u32) -> u64 {
        self.last_event[network as usize]
    }

    fn schedule(&mut self, network: u32, k: u64) -> Result<bool, SimError> {
        schedule_head(self.queue, self.networks, self.shapes, self.last_event, network, k)
    }
}

fn schedule_head(
    queue: &mut EventQueue,
    networks: &[NetworkConfig],
    shapes: &[ConnectionEventShape],
    last_event: &[u64],
    network: u32,
    k: u64,
) -> Result<bool, SimError> {
    let idx = network as usize;
    if k > last_event[idx] {
        return Ok(false);
    }
    queue.enqueue(shapes[idx].event(&networks[idx], k, EventKind::HEAD))?;
    Ok(true)
}

/// Simulation state of one run: parameter library, event queue, channel list
/// and collision ledger.
///
/// Network `n` runs connection events `0..total_packets(horizon, T_n)`, so
/// every network covers `horizon` microseconds measured from its own first
/// connection event. Events already started always run to completion.
#[derive(Debug)]
pub struct Simulator {
    networks: Vec<NetworkConfig>,
    shapes: Vec<ConnectionEventShape>,
    last_event: Vec<u64>,
    queue: EventQueue,
    channels: ChannelList,
    ledger: CollisionLedger,
    events_executed: u64,
    event_budget: Option<u64>,
}

impl Simulator {
    /// `networks[i].id` must equal `i`.
    pub fn new(networks: Vec<NetworkConfig>, horizon: SimTime) -> Result<Self, SimError> {
        for (i, net) in networks.iter().enumerate() {
            if net.id as usize != i {
                return Err(SimError::InvalidConfig(format!(
                    "network at position {i} has id {}",
                    net.id
                )));
            }
            net.validate(false)?;
        }
        let n_channels = networks.iter().map(|n| n.n_channels).max().unwrap_or(1);
        let shapes = networks.iter().map(NetworkConfig::shape).collect();
        let last_event = networks
            .iter()
            .map(|n| total_packets(horizon.0, n.interval) - 1)
            .collect();
        Ok(Self {
            ledger: CollisionLedger::new(networks.len()),
            channels: ChannelList::new(n_channels),
            queue: EventQueue::new(),
            networks,
            shapes,
            last_event,
            events_executed: 0,
            event_budget: None,
        })
    }

    /// Aborts the run with [`SimError::EventBudget`] after `budget` events.
    pub fn with_event_budget(mut self, budget: Option<u64>) -> Self {
        self.event_budget = budget;
        self
    }

    /// Records the identities of collided packets of `network`.
    pub fn track_packets_of(mut self, network: u32) -> Self {
        self.ledger.track(network);
        self
    }

    pub fn queue(&self) -> &EventQueue {
        &self.queue
    }

    pub fn ledger(&self) -> &CollisionLedger {
        &self.ledger
    }

    pub fn events_executed(&self) -> u64 {
        self.events_executed
    }

    /// Executes events until the queue drains.
    pub fn run(&mut self, hook: &mut dyn HeadHook) -> Result<(), SimError> {
        while let Some(event) = self.queue.dequeue_next() {
            self.events_executed += 1;
            if let Some(budget) = self.event_budget {
                if self.events_executed > budget {
                    return Err(SimError::EventBudget(budget));
                }
            }
            self.execute(&event)?;
            if event.kind.is_head() {
                let mut sched = Scheduler {
                    queue: &mut self.queue,
                    networks: &self.networks,
                    shapes: &self.shapes,
                    last_event: &self.last_event,
                };
                hook.on_head(&mut sched, &event)?;
            }
            let idx = event.network as usize;
            if let Some(next) = self.shapes[idx].successor(event.kind) {
                self.queue
                    .enqueue(self.shapes[idx].event(&self.networks[idx], event.conn_event, next))?;
            }
        }
        debug_assert!(self.channels.is_idle());
        Ok(())
    }

    fn execute(&mut self, event: &SimEvent) -> Result<(), SimError> {
        let ch = self.networks[event.network as usize].channel(event.conn_event);
        let packet = event.packet();
        match event.kind.phase {
            Phase::BeginAccess => {
                self.channels.access(ch, packet)?;
            }
            Phase::BeginCheck | Phase::EndCheck => {
                self.channels.collision_check(ch, packet);
            }
            Phase::EndRelease => {
                let occupant = self.channels.release(ch, packet)?;
                self.ledger.record(packet, occupant.collided);
            }
        }
        Ok(())
    }

    pub fn into_stats(self) -> EngineStats {
        EngineStats {
            events_executed: self.events_executed,
            ledger: self.ledger,
        }
    }
}

impl Schedule for Simulator {
    fn networks(&self) -> &[NetworkConfig] {
        &self.networks
    }

    fn now(&self) -> SimTime {
        self.queue.now()
    }

    fn last_event(&self, network: u32) -> u64 {
        self.last_event[network as usize]
    }

    fn schedule(&mut self, network: u32, k: u64) -> Result<bool, SimError> {
        schedule_head(
            &mut self.queue,
            &self.networks,
            &self.shapes,
            &self.last_event,
            network,
            k,
        )
    }
}

/// Plain next-event simulation: every connection event of every network.
#[derive(Debug, Default)]
pub struct Baseline;

impl HeadHook for Baseline {
    fn on_head(&mut self, sched: &mut Scheduler<'_>, head: &SimEvent) -> Result<(), SimError> {
        sched.schedule(head.network, head.conn_event + 1)?;
        Ok(())
    }
}

/// Runs the baseline engine over `networks` up to `horizon`.
pub fn run_baseline(networks: Vec<NetworkConfig>, horizon: SimTime) -> Result<EngineStats, SimError> {
    let mut sim = Simulator::new(networks, horizon)?;
    seed_first_events(&mut sim)?;
    sim.run(&mut Baseline)?;
    Ok(sim.into_stats())
}

/// Initialization: the first connection event of every network.
pub fn seed_first_events(sim: &mut Simulator) -> Result<(), SimError> {
    for id in 0..sim.networks.len() as u32 {
        sim.schedule(id, 0)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(id: u32, interval: u64, offset: u64) -> NetworkConfig {
        NetworkConfig::new(id, interval, offset).with_hopping(1, 1, 0)
    }

    #[test]
    fn horizon_zero_runs_first_connection_event() {
        let stats = run_baseline(vec![net(0, 7_500, 0)], SimTime(0)).unwrap();
        assert_eq!(stats.events_executed, 8);
        assert_eq!(stats.ledger.transmitted(0), 2);
    }

    #[test]
    fn no_networks_no_events() {
        let stats = run_baseline(vec![], SimTime(1_000_000)).unwrap();
        assert_eq!(stats.events_executed, 0);
    }

    #[test]
    fn single_network_hyperperiod() {
        let stats = run_baseline(vec![NetworkConfig::new(0, 7_500, 0)], SimTime(278_242)).unwrap();
        assert_eq!(stats.events_executed, 38 * 8);
        assert_eq!(stats.ledger.transmitted(0), 76);
        assert_eq!(stats.ledger.collided(0), 0);
    }

    #[test]
    fn identical_anchors_collide_pairwise() {
        let nets = vec![net(0, 7_500, 1_000), net(1, 7_500, 1_000)];
        let stats = run_baseline(nets, SimTime(0)).unwrap();
        assert_eq!(stats.ledger.collided(0), 2);
        assert_eq!(stats.ledger.collided(1), 2);
    }

    #[test]
    fn back_to_back_packets_do_not_collide() {
        // Network 1 starts exactly when network 0's slave packet ends.
        let nets = vec![net(0, 7_500, 0), net(1, 7_500, 742)];
        let stats = run_baseline(nets, SimTime(100_000)).unwrap();
        assert_eq!(stats.ledger.collided(0), 0);
        assert_eq!(stats.ledger.collided(1), 0);

        let nets = vec![net(0, 7_500, 0), net(1, 7_500, 741)];
        let stats = run_baseline(nets, SimTime(0)).unwrap();
        assert_eq!(stats.ledger.collided(0), 1);
        assert_eq!(stats.ledger.collided(1), 1);
    }

    #[test]
    fn different_channels_never_collide() {
        let a = NetworkConfig::new(0, 7_500, 0).with_hopping(1, 2, 0);
        let b = NetworkConfig::new(1, 7_500, 0).with_hopping(1, 2, 1);
        let stats = run_baseline(vec![a, b], SimTime(1_000_000)).unwrap();
        assert_eq!(stats.ledger.collided(0), 0);
    }

    #[test]
    fn event_budget_aborts() {
        let sim = Simulator::new(vec![net(0, 7_500, 0)], SimTime(1_000_000)).unwrap();
        let mut sim = sim.with_event_budget(Some(10));
        seed_first_events(&mut sim).unwrap();
        assert_eq!(sim.run(&mut Baseline), Err(SimError::EventBudget(10)));
    }

    #[test]
    fn delta_order_is_total() {
        let mk = |t, phase, network| SimEvent {
            time: SimTime(t),
            kind: EventKind::new(phase, PacketRole::Master),
            network,
            conn_event: 0,
        };
        let mut v = vec![
            mk(5, Phase::BeginCheck, 0),
            mk(5, Phase::EndCheck, 1),
            mk(5, Phase::BeginAccess, 0),
            mk(5, Phase::EndRelease, 0),
            mk(4, Phase::BeginCheck, 2),
        ];
        v.sort();
        let phases: Vec<_> = v.iter().map(|e| (e.time.0, e.kind.phase)).collect();
        assert_eq!(
            phases,
            vec![
                (4, Phase::BeginCheck),
                (5, Phase::EndCheck),
                (5, Phase::EndRelease),
                (5, Phase::BeginAccess),
                (5, Phase::BeginCheck)
            ]
        );
    }
}
