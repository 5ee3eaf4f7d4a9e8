//! Event ordering: timestamp first, then delta-cycle rank, so a packet
//! ending at t is released before one starting at t accesses the channel.

use cyclesim::ble::NetworkConfig;
use cyclesim::engine::{EventQueue, SimTime};

fn main() {
    // Network 1 starts exactly when network 0's connection event ends.
    let a = NetworkConfig::new(0, 7_500, 0);
    let b = NetworkConfig::new(1, 7_500, 742);
    let mut queue = EventQueue::new();
    for net in [&a, &b] {
        for ev in cyclesim::ble::schedule_connection_event(net, 0) {
            queue.enqueue(ev).unwrap();
        }
    }
    println!("{:>8}  {:>5}  {:>3}  event", "time", "delta", "net");
    while let Some(ev) = queue.dequeue_next() {
        println!("{:>8}  {:>5}  {:>3}  {:?} {:?}", ev.time.to_string(), ev.delta(), ev.network, ev.kind.role, ev.kind.phase);
    }
    assert_eq!(queue.now(), SimTime(742 + 742));
}
