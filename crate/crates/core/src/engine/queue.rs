use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{SimEvent, SimTime};
use crate::error::SimError;

/// Pending-event set. Binary heap keyed on the total event order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<SimEvent>>,
    last: Option<SimEvent>,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.last.map(|e| e.time).unwrap_or_default()
    }

    /// Rejects events that would execute before the last dequeued one.
    pub fn enqueue(&mut self, event: SimEvent) -> Result<(), SimError> {
        if let Some(last) = self.last {
            if event < last {
                return Err(SimError::ScheduledInPast { event, now: last.time });
            }
        }
        self.heap.push(Reverse(event));
        Ok(())
    }

    pub fn dequeue_next(&mut self) -> Option<SimEvent> {
        let Reverse(event) = self.heap.pop()?;
        self.last = Some(event);
        Some(event)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
