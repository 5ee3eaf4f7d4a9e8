//! Discrete-event simulation of co-located BLE piconets with adaptive
//! event skipping.
//!
//! * [`engine`]: next-event kernel, channel model and collision ledger.
//! * [`ble`]: connection-event geometry, channel hopping, horizons.
//! * [`skip`]: drift classification, skip prediction and the skipping engine.
//! * [`montecarlo`]: scenario drawing, repetitions and sweeps.
//! * [`cli`]: command line, configuration files and CSV output.

pub mod ble;
pub mod cli;
pub mod engine;
pub mod error;
pub mod montecarlo;
pub mod skip;

pub use ble::NetworkConfig;
pub use engine::{run_baseline, EngineStats, SimTime, Simulator};
pub use error::SimError;
pub use skip::{run_skipping, SkipManager};
