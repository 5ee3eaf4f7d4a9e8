use super::PacketId;

/// Per-network packet accounting. A packet counts as collided at most once,
/// however many interferers overlap it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionLedger {
    transmitted: Vec<u64>,
    collided: Vec<u64>,
    tracked: Option<u32>,
    tracked_collisions: Vec<PacketId>,
}

impl CollisionLedger {
    pub fn new(n_networks: usize) -> Self {
        Self {
            transmitted: vec![0; n_networks],
            collided: vec![0; n_networks],
            tracked: None,
            tracked_collisions: Vec::new(),
        }
    }

    /// Keep the identities of `network`'s collided packets.
    pub fn track(&mut self, network: u32) {
        self.tracked = Some(network);
    }

    /// Called once per packet when it leaves the channel.
    pub fn record(&mut self, packet: PacketId, collided: bool) {
        let n = packet.network as usize;
        self.transmitted[n] += 1;
        if collided {
            self.collided[n] += 1;
            if self.tracked == Some(packet.network) {
                self.tracked_collisions.push(packet);
            }
        }
    }

    pub fn transmitted(&self, network: u32) -> u64 {
        self.transmitted[network as usize]
    }

    pub fn collided(&self, network: u32) -> u64 {
        self.collided[network as usize]
    }

    /// Collided packets of the tracked network, sorted.
    pub fn tracked_collisions(&self) -> Vec<PacketId> {
        let mut v = self.tracked_collisions.clone();
        v.sort();
        v
    }
}
