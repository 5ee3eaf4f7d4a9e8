//! BLE connected-mode model: connection-event layout, air-times, channel
//! hopping and the hyperperiod-based simulation horizon.
//!
//! Every connection event is one master packet, an interframe space and one
//! slave packet. Time is in integer microseconds throughout.

use serde::{Deserialize, Serialize};

use crate::engine::{EventKind, PacketRole, Phase, SimEvent, SimTime};
use crate::error::SimError;

/// Connection intervals live on a 1.25 ms grid.
pub const INTERVAL_GRID_US: u64 = 1_250;
pub const MIN_CONN_INTERVAL_US: u64 = 7_500;
pub const MAX_CONN_INTERVAL_US: u64 = 10_240_000;
pub const DEFAULT_IFS_US: u64 = 150;
pub const DEFAULT_CHANNELS: u32 = 37;

/// 1 MHz symbol rate: one bit per microsecond.
const US_PER_BYTE: u64 = 8;

/// Over-the-air duration of a packet of `n_bytes`.
pub const fn packet_duration(n_bytes: u64) -> u64 {
    n_bytes * US_PER_BYTE
}

/// Duration of a full connection event: both packets plus one interframe space.
pub const fn connection_event_duration(n_pkg_m: u64, n_pkg_s: u64, d_ifs: u64) -> u64 {
    packet_duration(n_pkg_m) + packet_duration(n_pkg_s) + d_ifs
}

pub fn next_channel(ch: u32, hop: u32, n_channels: u32) -> u32 {
    ((ch as u64 + hop as u64) % n_channels as u64) as u32
}

/// Channel of connection event `k`, equivalent to `k` applications of
/// [`next_channel`] starting from `initial`.
pub fn channel_at_event(initial: u32, k: u64, hop: u32, n_channels: u32) -> u32 {
    let n = n_channels as u64;
    let steps = (k % n) * (hop as u64 % n) % n;
    ((initial as u64 + steps) % n) as u32
}

/// Parameters of one network (one master, one slave).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub id: u32,
    /// Connection interval in microseconds.
    pub interval: u64,
    /// Start of the first connection event.
    pub offset: u64,
    pub n_pkg_m: u64,
    pub n_pkg_s: u64,
    pub d_ifs: u64,
    pub hop: u32,
    pub n_channels: u32,
    pub initial_channel: u32,
}

impl NetworkConfig {
    /// A network with BLE defaults: 37-byte packets both ways, 150 µs IFS,
    /// hop increment 1 over 37 channels starting on channel 0.
    pub fn new(id: u32, interval: u64, offset: u64) -> Self {
        Self {
            id,
            interval,
            offset,
            n_pkg_m: 37,
            n_pkg_s: 37,
            d_ifs: DEFAULT_IFS_US,
            hop: 1,
            n_channels: DEFAULT_CHANNELS,
            initial_channel: 0,
        }
    }

    pub fn with_packets(mut self, n_pkg_m: u64, n_pkg_s: u64, d_ifs: u64) -> Self {
        self.n_pkg_m = n_pkg_m;
        self.n_pkg_s = n_pkg_s;
        self.d_ifs = d_ifs;
        self
    }

    pub fn with_hopping(mut self, hop: u32, n_channels: u32, initial_channel: u32) -> Self {
        self.hop = hop;
        self.n_channels = n_channels;
        self.initial_channel = initial_channel;
        self
    }

    pub fn shape(&self) -> ConnectionEventShape {
        ConnectionEventShape::new(self.n_pkg_m, self.n_pkg_s, self.d_ifs)
    }

    pub fn channel(&self, k: u64) -> u32 {
        channel_at_event(self.initial_channel, k, self.hop, self.n_channels)
    }

    /// Anchor time of connection event `k`.
    pub fn anchor(&self, k: u64) -> SimTime {
        SimTime(self.offset + k * self.interval)
    }

    /// Checks the structural invariants. Off-grid intervals are accepted
    /// when `strict_grid` is false so that non-BLE cyclic protocols can be
    /// modelled.
    pub fn validate(&self, strict_grid: bool) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(format!("network {}: {msg}", self.id)));
        if self.interval == 0 {
            return bad("connection interval must be positive".into());
        }
        if strict_grid
            && (self.interval % INTERVAL_GRID_US != 0
                || !(MIN_CONN_INTERVAL_US..=MAX_CONN_INTERVAL_US).contains(&self.interval))
        {
            return bad(format!("interval {} µs is not a valid BLE connection interval", self.interval));
        }
        if self.offset > self.interval {
            return bad(format!("offset {} exceeds interval {}", self.offset, self.interval));
        }
        if self.n_channels == 0 || self.initial_channel >= self.n_channels {
            return bad("initial channel outside the used-channel range".into());
        }
        if self.n_channels > 1 && (self.hop == 0 || self.hop >= self.n_channels) {
            return bad(format!("hop increment {} must lie in [1, {})", self.hop, self.n_channels));
        }
        if self.n_pkg_m == 0 {
            return bad("master packet must carry at least one byte".into());
        }
        Ok(())
    }
}

/// Intra-event timing of a connection event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectionEventShape {
    pub d_master: u64,
    pub d_slave: u64,
    pub d_ifs: u64,
}

impl ConnectionEventShape {
    pub fn new(n_pkg_m: u64, n_pkg_s: u64, d_ifs: u64) -> Self {
        Self {
            d_master: packet_duration(n_pkg_m),
            d_slave: packet_duration(n_pkg_s),
            d_ifs,
        }
    }

    pub fn has_slave(&self) -> bool {
        self.d_slave > 0
    }

    /// Total event duration `d_master + d_ifs + d_slave`.
    pub fn duration(&self) -> u64 {
        self.d_master + self.d_ifs + self.d_slave
    }

    pub fn packets_per_event(&self) -> u64 {
        if self.has_slave() {
            2
        } else {
            1
        }
    }

    /// `(begin, end)` of a packet relative to the event anchor.
    pub fn packet_span(&self, role: PacketRole) -> (u64, u64) {
        match role {
            PacketRole::Master => (0, self.d_master),
            PacketRole::Slave => {
                let begin = self.d_master + self.d_ifs;
                (begin, begin + self.d_slave)
            }
        }
    }

    fn offset_of(&self, kind: EventKind) -> u64 {
        let (begin, end) = self.packet_span(kind.role);
        match kind.phase {
            Phase::BeginAccess | Phase::BeginCheck => begin,
            Phase::EndCheck | Phase::EndRelease => end,
        }
    }

    /// The event following `kind` within the same connection event.
    pub fn successor(&self, kind: EventKind) -> Option<EventKind> {
        let phase = match kind.phase {
            Phase::BeginAccess => Phase::BeginCheck,
            Phase::BeginCheck => Phase::EndCheck,
            Phase::EndCheck => Phase::EndRelease,
            Phase::EndRelease => {
                return (kind.role == PacketRole::Master && self.has_slave())
                    .then_some(EventKind::new(Phase::BeginAccess, PacketRole::Slave));
            }
        };
        Some(EventKind::new(phase, kind.role))
    }

    /// Builds the simulation event of `kind` for connection event `k` of `net`.
    pub fn event(&self, net: &NetworkConfig, k: u64, kind: EventKind) -> SimEvent {
        SimEvent {
            time: SimTime(net.anchor(k).0 + self.offset_of(kind)),
            kind,
            network: net.id,
            conn_event: k,
        }
    }
}

/// All simulation events of connection event `k`: access, check, check and
/// release for each packet. A master-only event yields four.
pub fn schedule_connection_event(net: &NetworkConfig, k: u64) -> Vec<SimEvent> {
    let shape = net.shape();
    let mut out = Vec::with_capacity(8);
    let mut kind = Some(EventKind::HEAD);
    while let Some(current) = kind {
        out.push(shape.event(net, k, current));
        kind = shape.successor(current);
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn checked_lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Period after which all offsets and channel assignments repeat:
/// `LCM(σ·T_0, …, σ·T_n)` with `σ = LCM(n_channels, hop)`.
pub fn hyperperiod(configs: &[NetworkConfig], hop: u32, n_channels: u32) -> Result<u64, SimError> {
    let sigma = checked_lcm(n_channels as u64, hop as u64).ok_or(SimError::HorizonOverflow)?;
    configs.iter().try_fold(1u64, |acc, net| {
        let period = sigma.checked_mul(net.interval).ok_or(SimError::HorizonOverflow)?;
        checked_lcm(acc, period).ok_or(SimError::HorizonOverflow)
    })
}

/// Shortest horizon that yields the exact collision rate: the hyperperiod
/// padded by the longest connection-event duration.
pub fn optimal_sim_duration(configs: &[NetworkConfig], hop: u32, n_channels: u32) -> Result<SimTime, SimError> {
    if configs.is_empty() {
        return Err(SimError::InvalidConfig("at least one network is required".into()));
    }
    if configs.iter().any(|c| c.interval == 0) {
        return Err(SimError::InvalidConfig("connection intervals must be positive".into()));
    }
    let pad = configs.iter().map(|c| c.shape().duration()).max().unwrap_or(0);
    let period = hyperperiod(configs, hop, n_channels)?;
    period.checked_add(pad).map(SimTime).ok_or(SimError::HorizonOverflow)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packet_durations() {
        assert_eq!(packet_duration(37), 296);
        assert_eq!(packet_duration(0), 0);
        assert_eq!(packet_duration(1), 8);
    }

    #[test]
    fn event_durations() {
        assert_eq!(connection_event_duration(37, 37, 150), 742);
        assert_eq!(connection_event_duration(0, 0, 0), 0);
        assert_eq!(connection_event_duration(37, 0, 150), 446);
        assert_eq!(ConnectionEventShape::new(37, 37, 150).duration(), 2 * 296 + 150);
    }

    #[test]
    fn hopping() {
        assert_eq!(next_channel(36, 1, 37), 0);
        assert_eq!(next_channel(0, 1, 2), 1);
        assert_eq!(next_channel(5, 7, 37), 12);
        assert_eq!(channel_at_event(4, 0, 3, 37), 4);
        assert_eq!(channel_at_event(0, 37, 1, 37), 0);
        let mut ch = 0;
        for _ in 0..5 {
            ch = next_channel(ch, 7, 37);
        }
        assert_eq!(ch, 35);
        assert_eq!(channel_at_event(0, 5, 7, 37), 35);
    }

    #[test]
    fn connection_event_layout() {
        let net = NetworkConfig::new(0, 7_500, 1_000);
        let events = schedule_connection_event(&net, 0);
        assert_eq!(events.len(), 8);
        let at = |phase, role| {
            events
                .iter()
                .find(|e| e.kind == EventKind::new(phase, role))
                .map(|e| e.time.0)
                .unwrap()
        };
        assert_eq!(at(Phase::BeginAccess, PacketRole::Master), 1_000);
        assert_eq!(at(Phase::EndRelease, PacketRole::Master), 1_296);
        assert_eq!(at(Phase::BeginAccess, PacketRole::Slave), 1_446);
        assert_eq!(at(Phase::EndCheck, PacketRole::Slave), 1_742);

        let later = schedule_connection_event(&net, 3);
        assert!(later.iter().all(|e| e.conn_event == 3 && e.time.0 >= 1_000 + 3 * 7_500));
    }

    #[test]
    fn master_only_event_has_four_events() {
        let net = NetworkConfig::new(0, 7_500, 0).with_packets(37, 0, 150);
        assert_eq!(schedule_connection_event(&net, 0).len(), 4);
        assert_eq!(net.shape().duration(), 446);
    }

    #[test]
    fn optimal_horizon() {
        let one = [NetworkConfig::new(0, 7_500, 0)];
        assert_eq!(optimal_sim_duration(&one, 1, 37).unwrap(), SimTime(278_242));
        let two = [NetworkConfig::new(0, 10_000, 0), NetworkConfig::new(1, 7_500, 0)];
        assert_eq!(optimal_sim_duration(&two, 1, 37).unwrap(), SimTime(1_110_742));
        assert_eq!(optimal_sim_duration(&two, 1, 1).unwrap(), SimTime(30_000 + 742));
    }

    #[test]
    fn horizon_overflow_is_reported() {
        let nets: Vec<_> = [10_238_750u64, 10_237_500, 10_236_250, 10_235_000, 10_233_750, 10_232_500]
            .iter()
            .enumerate()
            .map(|(i, &t)| NetworkConfig::new(i as u32, t, 0))
            .collect();
        assert_eq!(optimal_sim_duration(&nets, 1, 37), Err(SimError::HorizonOverflow));
    }

    #[test]
    fn validation() {
        assert!(NetworkConfig::new(0, 7_500, 7_500).validate(true).is_ok());
        assert!(NetworkConfig::new(0, 7_600, 0).validate(true).is_err());
        assert!(NetworkConfig::new(0, 7_600, 0).validate(false).is_ok());
        assert!(NetworkConfig::new(0, 7_500, 7_501).validate(true).is_err());
        assert!(NetworkConfig::new(0, 6_250, 0).validate(true).is_err());
    }
}
