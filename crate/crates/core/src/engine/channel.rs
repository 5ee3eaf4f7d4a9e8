use super::PacketId;
use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occupant {
    pub packet: PacketId,
    pub collided: bool,
}

/// Current transmissions per channel.
#[derive(Debug, Clone)]
pub struct ChannelList {
    channels: Vec<Vec<Occupant>>,
}

impl ChannelList {
    pub fn new(n_channels: u32) -> Self {
        Self {
            channels: vec![Vec::new(); n_channels.max(1) as usize],
        }
    }

    /// Puts `packet` on `ch` and returns the packets that were already there.
    ///
    /// Only the target channel is searched for an existing entry: a packet
    /// is always released on the channel it accessed.
    pub fn access(&mut self, ch: u32, packet: PacketId) -> Result<Vec<PacketId>, SimError> {
        let occupants = &mut self.channels[ch as usize];
        if occupants.iter().any(|o| o.packet == packet) {
            return Err(SimError::DoubleAccess(packet));
        }
        let prior = occupants.iter().map(|o| o.packet).collect();
        occupants.push(Occupant {
            packet,
            collided: false,
        });
        Ok(prior)
    }

    pub fn release(&mut self, ch: u32, packet: PacketId) -> Result<Occupant, SimError> {
        let occupants = &mut self.channels[ch as usize];
        let pos = occupants
            .iter()
            .position(|o| o.packet == packet)
            .ok_or(SimError::ReleaseUnoccupied(packet, ch))?;
        Ok(occupants.swap_remove(pos))
    }

    /// Flags `packet` and every co-occupant of a different network when they
    /// share the channel. Returns whether any such overlap exists.
    pub fn collision_check(&mut self, ch: u32, packet: PacketId) -> bool {
        let occupants = &mut self.channels[ch as usize];
        let foreign = occupants
            .iter()
            .any(|o| o.packet.network != packet.network);
        if foreign {
            for o in occupants.iter_mut() {
                o.collided = true;
            }
        }
        foreign
    }

    pub fn occupants(&self, ch: u32) -> &[Occupant] {
        &self.channels[ch as usize]
    }

    pub fn is_idle(&self) -> bool {
        self.channels.iter().all(Vec::is_empty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::PacketRole;

    fn pkt(network: u32) -> PacketId {
        PacketId {
            network,
            conn_event: 0,
            role: PacketRole::Master,
        }
    }

    #[test]
    fn access_on_empty_channel() {
        let mut ch = ChannelList::new(2);
        assert!(ch.access(0, pkt(0)).unwrap().is_empty());
    }

    #[test]
    fn overlap_flags_both() {
        let mut ch = ChannelList::new(2);
        ch.access(0, pkt(0)).unwrap();
        assert_eq!(ch.access(0, pkt(1)).unwrap(), vec![pkt(0)]);
        assert!(ch.collision_check(0, pkt(1)));
        assert!(ch.occupants(0).iter().all(|o| o.collided));
    }

    #[test]
    fn channels_are_isolated() {
        let mut ch = ChannelList::new(2);
        assert!(ch.access(0, pkt(0)).unwrap().is_empty());
        assert!(ch.access(1, pkt(1)).unwrap().is_empty());
        assert!(!ch.collision_check(0, pkt(0)));
        assert!(!ch.collision_check(1, pkt(1)));
    }

    #[test]
    fn sole_occupant_no_collision() {
        let mut ch = ChannelList::new(1);
        ch.access(0, pkt(0)).unwrap();
        assert!(!ch.collision_check(0, pkt(0)));
    }

    #[test]
    fn release_paths() {
        let mut ch = ChannelList::new(1);
        ch.access(0, pkt(0)).unwrap();
        ch.access(0, pkt(1)).unwrap();
        ch.release(0, pkt(0)).unwrap();
        assert_eq!(ch.occupants(0).len(), 1);
        assert_eq!(ch.occupants(0)[0].packet, pkt(1));
        ch.release(0, pkt(1)).unwrap();
        assert!(ch.is_idle());
        assert!(matches!(ch.release(0, pkt(1)), Err(SimError::ReleaseUnoccupied(..))));
    }

    #[test]
    fn double_access_fails() {
        let mut ch = ChannelList::new(1);
        ch.access(0, pkt(0)).unwrap();
        assert_eq!(ch.access(0, pkt(0)), Err(SimError::DoubleAccess(pkt(0))));
    }
}
