//! Plain next-event simulation of three networks sharing two channels.

use cyclesim::ble::{optimal_sim_duration, NetworkConfig};
use cyclesim::engine::run_baseline;

fn main() {
    let networks = vec![
        NetworkConfig::new(0, 100_000, 742).with_hopping(1, 2, 0),
        NetworkConfig::new(1, 30_000, 20_000).with_hopping(1, 2, 1),
        NetworkConfig::new(2, 7_500, 1_000).with_hopping(1, 2, 0),
    ];
    let horizon = optimal_sim_duration(&networks, 1, 2).unwrap();
    let stats = run_baseline(networks.clone(), horizon).unwrap();
    println!("horizon {horizon}, {} events", stats.events_executed);
    for n in &networks {
        let sent = stats.ledger.transmitted(n.id);
        let hit = stats.ledger.collided(n.id);
        println!(
            "network {} (T = {} us): {hit}/{sent} packets collided ({:.2} %)",
            n.id,
            n.interval,
            100.0 * hit as f64 / sent as f64
        );
    }
}
