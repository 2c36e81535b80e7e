//! Receive-side PDCP: duplicate discard and in-order delivery with a
//! reordering timer.
//!
//! While the timer runs, `timer_trigger` holds the lowest out-of-order SN
//! that was buffered when it started. On expiry everything held below the
//! trigger is released, followed by the consecutive run starting at the
//! trigger; anything still held restarts the timer.

use std::collections::{BTreeSet, HashSet};

use crate::engine::SimTime;
use crate::error::SimError;

use super::Sn;

/// Longest finite reordering window accepted.
pub const MAX_FINITE_REORDERING_S: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReorderWindow {
    OutOfOrder,
    Timed(SimTime),
    Infinite,
}

impl ReorderWindow {
    /// Accepts 0 (out-of-order), (0, 3] seconds, or +∞.
    pub fn from_secs(t: f64) -> Result<Self, SimError> {
        if t == 0.0 {
            Ok(ReorderWindow::OutOfOrder)
        } else if t == f64::INFINITY {
            Ok(ReorderWindow::Infinite)
        } else if t > 0.0 && t <= MAX_FINITE_REORDERING_S {
            Ok(ReorderWindow::Timed(SimTime::from_secs_f64(t)))
        } else {
            Err(SimError::config(
                "t_reordering_ms",
                format!("{} ms is outside {{0}} ∪ (0, 3000] ∪ {{inf}}", t * 1e3),
            ))
        }
    }

    pub fn is_in_order(self) -> bool {
        !matches!(self, ReorderWindow::OutOfOrder)
    }

    /// Timer duration, or `None` when no expiry event should be scheduled.
    pub fn timer_duration(self) -> Option<SimTime> {
        match self {
            ReorderWindow::Timed(d) => Some(d),
            _ => None,
        }
    }
}

pub fn reorder_window_bounds(t_secs: f64) -> Result<ReorderWindow, SimError> {
    ReorderWindow::from_secs(t_secs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimerAction {
    None,
    Start,
    Stop,
    Restart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discard {
    /// Another copy of this SN was already received.
    Duplicate,
    /// First copy, but the delivery window has already moved past it.
    Late,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RxOutcome {
    pub delivered: Vec<Sn>,
    pub timer: TimerAction,
    pub discarded: Option<Discard>,
}

#[derive(Debug, Clone)]
pub struct ReorderBuffer {
    window: ReorderWindow,
    next_expected: Sn,
    received: HashSet<Sn>,
    held: BTreeSet<Sn>,
    timer_trigger: Option<Sn>,
    delivered_high: Option<Sn>,
    pub duplicates_discarded: u64,
    pub late_discarded: u64,
}

impl ReorderBuffer {
    pub fn new(window: ReorderWindow) -> Self {
        Self {
            window,
            next_expected: 0,
            received: HashSet::new(),
            held: BTreeSet::new(),
            timer_trigger: None,
            delivered_high: None,
            duplicates_discarded: 0,
            late_discarded: 0,
        }
    }

    pub fn window(&self) -> ReorderWindow {
        self.window
    }

    pub fn next_expected(&self) -> Sn {
        self.next_expected
    }

    pub fn timer_running(&self) -> bool {
        self.timer_trigger.is_some()
    }

    pub fn timer_trigger(&self) -> Option<Sn> {
        self.timer_trigger
    }

    pub fn held(&self) -> impl Iterator<Item = Sn> + '_ {
        self.held.iter().copied()
    }

    pub fn delivered_high(&self) -> Option<Sn> {
        self.delivered_high
    }

    pub fn rx_ingest(&mut self, sn: Sn, _now: SimTime) -> RxOutcome {
        if self.received.contains(&sn) {
            self.duplicates_discarded += 1;
            return RxOutcome {
                delivered: Vec::new(),
                timer: TimerAction::None,
                discarded: Some(Discard::Duplicate),
            };
        }
        self.received.insert(sn);

        if !self.window.is_in_order() {
            self.delivered_high = Some(self.delivered_high.map_or(sn, |h| h.max(sn)));
            return RxOutcome {
                delivered: vec![sn],
                timer: TimerAction::None,
                discarded: None,
            };
        }

        if sn < self.next_expected {
            self.late_discarded += 1;
            return RxOutcome {
                delivered: Vec::new(),
                timer: TimerAction::None,
                discarded: Some(Discard::Late),
            };
        }

        self.held.insert(sn);
        let mut delivered = Vec::new();
        self.deliver_consecutive(&mut delivered);

        let was_running = self.timer_trigger.is_some();
        if let Some(trigger) = self.timer_trigger {
            if self.next_expected > trigger {
                self.timer_trigger = None;
            }
        }
        let stopped = was_running && self.timer_trigger.is_none();
        if self.timer_trigger.is_none() {
            self.timer_trigger = self.held.first().copied();
        }
        let timer = match (was_running, stopped, self.timer_trigger.is_some()) {
            (false, _, true) => TimerAction::Start,
            (true, true, true) => TimerAction::Restart,
            (true, true, false) => TimerAction::Stop,
            _ => TimerAction::None,
        };
        RxOutcome {
            delivered,
            timer,
            discarded: None,
        }
    }

    /// Reordering timer fired.
    pub fn on_reorder_expiry(&mut self, _now: SimTime) -> RxOutcome {
        let Some(trigger) = self.timer_trigger.take() else {
            return RxOutcome {
                delivered: Vec::new(),
                timer: TimerAction::None,
                discarded: None,
            };
        };
        let mut delivered: Vec<Sn> = self.held.range(..trigger).copied().collect();
        self.held.retain(|s| *s >= trigger);
        if let Some(&last) = delivered.last() {
            self.delivered_high = Some(last);
        }
        self.next_expected = self.next_expected.max(trigger);
        self.deliver_consecutive(&mut delivered);

        self.timer_trigger = self.held.first().copied();
        let timer = if self.timer_trigger.is_some() {
            TimerAction::Restart
        } else {
            TimerAction::None
        };
        RxOutcome {
            delivered,
            timer,
            discarded: None,
        }
    }

    fn deliver_consecutive(&mut self, out: &mut Vec<Sn>) {
        while self.held.remove(&self.next_expected) {
            out.push(self.next_expected);
            self.delivered_high = Some(self.next_expected);
            self.next_expected += 1;
        }
    }
}
