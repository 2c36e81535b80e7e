//! Application sources: constant-bit-rate flows for measured UEs and
//! full-buffer sources that keep interferer beams busy.

use crate::engine::SimTime;
use crate::pdcp::{LegPath, PdcpSdu, Sn};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbrFlow {
    pub ue: usize,
    pub packet_bytes: u32,
    pub interval: SimTime,
    pub next_emit: SimTime,
    next_sn: Sn,
}

impl CbrFlow {
    pub fn new(ue: usize, packet_bytes: u32, interval: SimTime, phase: SimTime) -> Self {
        assert!(interval > SimTime::ZERO, "CBR interval must be positive");
        assert!(packet_bytes > 0, "CBR packet size must be positive");
        Self {
            ue,
            packet_bytes,
            interval,
            next_emit: phase,
            next_sn: 0,
        }
    }

    pub fn offered_bps(&self) -> f64 {
        f64::from(self.packet_bytes) * 8.0 / self.interval.as_secs_f64()
    }

    /// Emits the SDU due at `now` and advances the schedule by one interval.
    pub fn cbr_tick(&mut self, now: SimTime) -> PdcpSdu {
        debug_assert_eq!(now, self.next_emit);
        let sdu = PdcpSdu {
            sn: self.next_sn,
            flow: self.ue,
            size_bytes: self.packet_bytes,
            created_at: now,
            path: LegPath::Mn,
        };
        self.next_sn += 1;
        self.next_emit = self.next_emit + self.interval;
        sdu
    }
}

/// Never-empty source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullBufferSource {
    pub ue: usize,
}

impl FullBufferSource {
    pub fn backlog_tbs(&self) -> u32 {
        u32::MAX
    }

    /// Bytes produced for a grant: the whole grant is always filled.
    pub fn full_buffer_poll(&self, granted_bytes: u32) -> u32 {
        granted_bytes
    }
}
