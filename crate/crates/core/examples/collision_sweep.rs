//! Collision rate and event reduction over a short T_max sweep.
//!
//! cargo run --release --example collision_sweep -- [reps] [seed]

use cyclesim::montecarlo::{run_sweep, ExperimentConfig, RunMode};

fn main() {
    let mut args = std::env::args().skip(1);
    let reps = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = ExperimentConfig {
        networks: 3,
        channels: 2,
        reps,
        t_max_start_us: 7_500,
        t_max_end_us: 70_000,
        t_max_step_us: 12_500,
        mode: RunMode::Verify,
        seed,
        ..ExperimentConfig::default()
    };
    let out = run_sweep(&cfg).unwrap();
    println!("{:>8}  {:>8}  {:>10}  {:>10}", "T_max", "rate", "reduction", "speedup");
    for s in &out.sweep {
        println!(
            "{:>8}  {:>8.4}  {:>10.2}  {:>10.2}",
            s.t_max,
            s.mean_collision_rate.unwrap_or(0.0),
            s.event_reduction.map_or(0.0, |x| x.1),
            s.speedup.map_or(0.0, |x| x.1)
        );
    }
    assert!(out.mismatches.is_empty(), "engines disagree");
}
