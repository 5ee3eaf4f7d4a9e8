//! Drift classification and skip prediction for one pair of intervals.
//!
//! cargo run --example skip_prediction -- <T_l> <T_h> <phi> [d]

use cyclesim::skip::{compute_gamma, oracle_next_overlap, predict};

fn main() {
    let args: Vec<i64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let (t_l, t_h, phi, d) = match args[..] {
        [t_l, t_h, phi] => (t_l, t_h, phi, 742),
        [t_l, t_h, phi, d] => (t_l, t_h, phi, d),
        _ => (30_000, 106_250, 5_000, 742),
    };
    let g = compute_gamma(t_l as u64, t_h as u64);
    println!("T_l = {t_l}, T_h = {t_h}: {} with gamma = {}", g.mode, g.gamma);
    let (_, p) = predict(phi, t_l as u64, t_h as u64, d);
    println!("phi = {phi}, d = {d}: case {}, corrections {:?}", p.case, p.corrections);
    match p.counts() {
        Some((k_l, k_h)) => println!("skip: k_l = {k_l}, k_h = {k_h}"),
        None => println!("skip: never collide again"),
    }
    let first = oracle_next_overlap(phi, t_l, t_h, d, 10_000);
    println!("first overlap by brute force: {first:?}");

    // Walk the chain for a few steps.
    let (mut a, mut b) = (0i64, 0i64);
    for _ in 0..8 {
        let off = phi + a * t_l - b * t_h;
        let (_, p) = predict(off, t_l as u64, t_h as u64, d);
        let Some((k_l, k_h)) = p.counts() else { break };
        a += k_l as i64;
        b += k_h as i64;
        let off = phi + a * t_l - b * t_h;
        let tag = if off.abs() <= d { "overlap" } else { "re-examine" };
        println!("  -> L event {a}, H event {b}, offset {off} ({tag}, case {})", p.case);
    }
}
