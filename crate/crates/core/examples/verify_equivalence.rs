//! Cross-checks the skipping engine against the baseline on random
//! scenarios and prints event counts.
//!
//! cargo run --release --example verify_equivalence -- [scenarios] [seed]

use cyclesim::montecarlo::{draw_scenario, scenario_rng, verify_equivalence, ExperimentConfig, RunOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let count: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut failures = 0;
    for i in 0..count {
        let cfg = ExperimentConfig {
            networks: 2 + (i % 4) as usize,
            channels: if i % 2 == 0 { 2 } else { 37 },
            seed,
            ..ExperimentConfig::default()
        };
        let scenario = match draw_scenario(&mut scenario_rng(seed, 0, i), &cfg, 100_000) {
            Ok(s) if s.baseline_events() <= 20_000_000 => s,
            Ok(_) => continue,
            Err(e) => {
                println!("scenario {i}: {e}");
                continue;
            }
        };
        let opts = RunOptions {
            oracle_guard: true,
            ..RunOptions::default()
        };
        let report = verify_equivalence(&scenario, &opts).expect("engine error");
        println!(
            "scenario {i}: N={} collisions {}/{} packets {}/{} events {}/{} {}",
            scenario.networks.len(),
            report.baseline.collisions,
            report.skipping.collisions,
            report.baseline.packets,
            report.skipping.packets,
            report.baseline.events_executed,
            report.skipping.events_executed,
            if report.equal { "ok" } else { "MISMATCH" }
        );
        if let Some(d) = report.divergence {
            failures += 1;
            println!("{d}");
        }
    }
    if failures > 0 {
        std::process::exit(2);
    }
}
