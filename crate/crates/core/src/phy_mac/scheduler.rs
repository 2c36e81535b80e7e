//! Per-beam round-robin resource allocation.

/// Backlog of one queue in transport blocks; `u32::MAX` stands for full buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueDemand {
    pub queue: usize,
    pub backlog_tbs: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Allocation {
    pub queue: usize,
    pub tbs: u32,
    pub resources: u32,
}

/// Rotation state that persists across slots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundRobin {
    last_served: Option<usize>,
}

impl RoundRobin {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_served(&self) -> Option<usize> {
        self.last_served
    }

    /// Hands out one TB at a time, cycling over non-empty queues in ascending
    /// queue-id order starting after the last queue served, until resources
    /// or backlog run out.
    pub fn allocate(
        &mut self,
        active_queues: &[QueueDemand],
        slot_resources: u32,
        resources_per_tb: u32,
    ) -> Vec<Allocation> {
        let per_tb = resources_per_tb.max(1);
        let mut order: Vec<QueueDemand> = active_queues
            .iter()
            .copied()
            .filter(|q| q.backlog_tbs > 0)
            .collect();
        if order.is_empty() {
            return Vec::new();
        }
        order.sort_by_key(|q| q.queue);
        let start = match self.last_served {
            Some(last) => order.iter().position(|q| q.queue > last).unwrap_or(0),
            None => 0,
        };
        order.rotate_left(start);

        let mut grants: Vec<Allocation> = Vec::new();
        let mut remaining = slot_resources;
        loop {
            let mut progressed = false;
            for q in order.iter_mut() {
                if remaining < per_tb {
                    break;
                }
                if q.backlog_tbs == 0 {
                    continue;
                }
                q.backlog_tbs -= 1;
                remaining -= per_tb;
                progressed = true;
                self.last_served = Some(q.queue);
                match grants.iter_mut().find(|g| g.queue == q.queue) {
                    Some(g) => {
                        g.tbs += 1;
                        g.resources += per_tb;
                    }
                    None => grants.push(Allocation {
                        queue: q.queue,
                        tbs: 1,
                        resources: per_tb,
                    }),
                }
            }
            if !progressed || remaining < per_tb {
                break;
            }
        }
        grants
    }
}

pub fn schedule_round_robin(
    rr: &mut RoundRobin,
    active_queues: &[QueueDemand],
    slot_resources: u32,
    resources_per_tb: u32,
) -> Vec<Allocation> {
    rr.allocate(active_queues, slot_resources, resources_per_tb)
}
