//! Optimal simulation horizons: one hyperperiod plus the longest connection
//! event, with channel hopping stretching each network's period.

use cyclesim::ble::{hyperperiod, optimal_sim_duration, NetworkConfig};
use cyclesim::skip::total_packets;

fn main() {
    let cases: [(&[u64], u32); 3] = [(&[7_500], 37), (&[30_000], 37), (&[7_500, 8_750, 100_000], 2)];
    for (intervals, channels) in cases {
        let nets: Vec<NetworkConfig> = intervals
            .iter()
            .enumerate()
            .map(|(i, &t)| NetworkConfig::new(i as u32, t, 0).with_hopping(1, channels, 0))
            .collect();
        let p = hyperperiod(&nets, 1, channels).unwrap();
        let d_sim = optimal_sim_duration(&nets, 1, channels).unwrap();
        println!("intervals {intervals:?}, {channels} channels: hyperperiod {p} us, horizon {d_sim}");
        for n in &nets {
            println!("  T = {}: {} connection events", n.interval, total_packets(d_sim.0, n.interval));
        }
    }
    let huge: Vec<NetworkConfig> = [10_238_750u64, 10_237_500, 10_236_250, 10_235_000, 10_233_750]
        .iter()
        .enumerate()
        .map(|(i, &t)| NetworkConfig::new(i as u32, t, 0))
        .collect();
    println!("five long coprime-ish intervals: {:?}", optimal_sim_duration(&huge, 1, 37));
}
