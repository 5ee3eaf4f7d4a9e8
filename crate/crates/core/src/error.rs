use thiserror::Error;

use crate::engine::{PacketId, SimEvent, SimTime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("event {event:?} scheduled before the current simulation time {now:?}")]
    ScheduledInPast { event: SimEvent, now: SimTime },
    #[error("packet {0:?} already occupies a channel")]
    DoubleAccess(PacketId),
    #[error("packet {0:?} released channel {1} it does not occupy")]
    ReleaseUnoccupied(PacketId, u32),
    #[error("simulation horizon overflows 64-bit microseconds")]
    HorizonOverflow,
    #[error("horizon {horizon} µs exceeds the configured limit of {limit} µs")]
    HorizonLimit { horizon: u64, limit: u64 },
    #[error("event budget of {0} events exhausted")]
    EventBudget(u64),
    #[error("skip prediction diverged from the stepping oracle: {0}")]
    UnsafePrediction(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
