//! Discrete-event core: integer-nanosecond clock, a stable time-ordered
//! event queue with tombstone cancellation, and labelled random streams.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::hash::Hasher;
use std::ops::{Add, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::SimError;

/// Simulation time in integer nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000_000)
    }

    /// Rounds to the nearest nanosecond. Negative or NaN inputs clamp to zero.
    pub fn from_secs_f64(s: f64) -> Self {
        if s.is_nan() || s <= 0.0 {
            return SimTime::ZERO;
        }
        if s.is_infinite() {
            return SimTime::MAX;
        }
        SimTime((s * 1e9).round() as u64)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-9
    }

    pub fn saturating_add(self, d: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(d.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        self.saturating_add(rhs)
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}", self.as_secs_f64())
    }
}

/// Handle returned by [`EventQueue::schedule`]; used to cancel a pending event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventHandle(u64);

#[derive(Debug)]
struct Entry<P> {
    fire_time: SimTime,
    seq: u64,
    payload: P,
}

impl<P> PartialEq for Entry<P> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_time == other.fire_time && self.seq == other.seq
    }
}

impl<P> Eq for Entry<P> {}

impl<P> PartialOrd for Entry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Entry<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.fire_time, self.seq).cmp(&(other.fire_time, other.seq))
    }
}

/// Min-heap of pending events. Ties on `fire_time` are broken by insertion
/// order; cancelled events stay in the heap and are skipped on pop.
#[derive(Debug)]
pub struct EventQueue<P> {
    heap: BinaryHeap<Reverse<Entry<P>>>,
    cancelled: HashSet<u64>,
    now: SimTime,
    next_seq: u64,
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> EventQueue<P> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
            now: SimTime::ZERO,
            next_seq: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn schedule(&mut self, fire_time: SimTime, payload: P) -> Result<EventHandle, SimError> {
        if fire_time < self.now {
            return Err(SimError::EventInPast {
                fire_time,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Entry {
            fire_time,
            seq,
            payload,
        }));
        Ok(EventHandle(seq))
    }

    /// Marks the event as cancelled. Cancelling an already-dispatched or
    /// unknown handle is a no-op.
    pub fn cancel(&mut self, handle: EventHandle) {
        if handle.0 < self.next_seq {
            self.cancelled.insert(handle.0);
        }
    }

    /// Fire time of the next live event without removing it.
    pub fn peek_time(&mut self) -> Option<SimTime> {
        self.purge_cancelled_head();
        self.heap.peek().map(|Reverse(e)| e.fire_time)
    }

    /// Removes the next live event with `fire_time <= limit` and advances the clock.
    pub fn pop_until(&mut self, limit: SimTime) -> Option<(SimTime, EventHandle, P)> {
        self.purge_cancelled_head();
        match self.heap.peek() {
            Some(Reverse(e)) if e.fire_time <= limit => {}
            _ => return None,
        }
        let Reverse(entry) = self.heap.pop()?;
        self.now = entry.fire_time;
        Some((entry.fire_time, EventHandle(entry.seq), entry.payload))
    }

    /// Advances the clock without dispatching. Never moves backwards.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.now {
            self.now = t;
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    fn purge_cancelled_head(&mut self) {
        while let Some(Reverse(e)) = self.heap.peek() {
            if self.cancelled.remove(&e.seq) {
                self.heap.pop();
            } else {
                break;
            }
        }
    }
}

/// Event classes dispatched by the scenario driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    PacketArrival,
    TxComplete,
    HarqFeedback,
    DuplicationTimerExpiry,
    ReorderTimerExpiry,
    ChannelUpdate,
    MobilityTick,
    TrafficTick,
    SlotStart,
    MeasurementTick,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::PacketArrival => "packet-arrival",
            EventKind::TxComplete => "tx-complete",
            EventKind::HarqFeedback => "harq-feedback",
            EventKind::DuplicationTimerExpiry => "duplication-timer-expiry",
            EventKind::ReorderTimerExpiry => "reorder-timer-expiry",
            EventKind::ChannelUpdate => "channel-update",
            EventKind::MobilityTick => "mobility-tick",
            EventKind::TrafficTick => "traffic-tick",
            EventKind::SlotStart => "slot-start",
            EventKind::MeasurementTick => "measurement-tick",
        }
    }
}

/// Entity an event is addressed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    All,
    Cell(usize),
    Ue(usize),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::All => f.write_str("all"),
            Target::Cell(c) => write!(f, "cell{c}"),
            Target::Ue(u) => write!(f, "ue{u}"),
        }
    }
}

/// Line-oriented dispatch log (`time kind target`) plus a running digest
/// that is always maintained so replays can be compared cheaply.
#[derive(Debug, Default)]
pub struct TraceLog {
    lines: Option<Vec<String>>,
    digest: Fnv64,
    count: u64,
}

impl TraceLog {
    pub fn new(keep_lines: bool) -> Self {
        Self {
            lines: keep_lines.then(Vec::new),
            digest: Fnv64::default(),
            count: 0,
        }
    }

    pub fn record(&mut self, t: SimTime, kind: EventKind, target: Target) {
        self.digest.write_u64(t.as_nanos());
        self.digest.write(kind.label().as_bytes());
        let (tag, id) = match target {
            Target::All => (0u8, 0usize),
            Target::Cell(c) => (1, c),
            Target::Ue(u) => (2, u),
        };
        self.digest.write_u8(tag);
        self.digest.write_u64(id as u64);
        self.count += 1;
        if let Some(lines) = self.lines.as_mut() {
            lines.push(format!("{t} {} {target}", kind.label()));
        }
    }

    pub fn digest(&self) -> u64 {
        self.digest.finish()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn lines(&self) -> Option<&[String]> {
        self.lines.as_deref()
    }
}

/// 64-bit FNV-1a; stable across platforms and releases, unlike `DefaultHasher`.
#[derive(Debug, Clone, Copy)]
pub struct Fnv64(u64);

impl Default for Fnv64 {
    fn default() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }
}

impl Hasher for Fnv64 {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}

/// Random stream keyed by `(run_seed, component_label)`.
///
/// The seed keys a ChaCha12 generator and the label hash selects one of its
/// 2^64 independent streams, so distinct labels never share keystream.
pub type RngStream = ChaCha12Rng;

pub fn rng_stream(run_seed: u64, component_label: &str) -> Result<RngStream, SimError> {
    if component_label.is_empty() {
        return Err(SimError::EmptyStreamLabel);
    }
    let mut h = Fnv64::default();
    h.write(component_label.as_bytes());
    let mut rng = ChaCha12Rng::seed_from_u64(run_seed);
    rng.set_stream(h.finish());
    Ok(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn drain<P>(q: &mut EventQueue<P>) -> Vec<P> {
        let mut out = Vec::new();
        while let Some((_, _, p)) = q.pop_until(SimTime::MAX) {
            out.push(p);
        }
        out
    }

    #[test]
    fn event_at_now_precedes_later_events() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_millis(3), "later").unwrap();
        q.schedule(SimTime::ZERO, "now").unwrap();
        assert_eq!(drain(&mut q), vec!["now", "later"]);
    }

    #[test]
    fn equal_times_dispatch_in_insertion_order() {
        let mut q = EventQueue::new();
        let t = SimTime::from_secs_f64(5.0);
        q.schedule(t, 'A').unwrap();
        q.schedule(t, 'B').unwrap();
        q.schedule(t, 'C').unwrap();
        assert_eq!(drain(&mut q), vec!['A', 'B', 'C']);
    }

    #[test]
    fn cancelled_event_never_dispatched() {
        let mut q = EventQueue::new();
        let h = q.schedule(SimTime::from_millis(1), 1).unwrap();
        q.schedule(SimTime::from_millis(2), 2).unwrap();
        q.cancel(h);
        assert_eq!(drain(&mut q), vec![2]);
    }

    #[test]
    fn rejects_past_events() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_millis(10), ()).unwrap();
        q.pop_until(SimTime::MAX).unwrap();
        let err = q.schedule(SimTime::from_millis(5), ()).unwrap_err();
        assert!(matches!(err, SimError::EventInPast { .. }));
    }

    #[test]
    fn pop_until_respects_limit() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_millis(5), 5).unwrap();
        q.schedule(SimTime::from_millis(15), 15).unwrap();
        assert_eq!(q.pop_until(SimTime::from_millis(10)).map(|e| e.2), Some(5));
        assert!(q.pop_until(SimTime::from_millis(10)).is_none());
        assert_eq!(q.now(), SimTime::from_millis(5));
    }

    #[test]
    fn secs_round_to_nearest_nanosecond() {
        assert_eq!(SimTime::from_secs_f64(0.02).as_nanos(), 20_000_000);
        assert_eq!(SimTime::from_secs_f64(1.0e-9).as_nanos(), 1);
        assert_eq!(SimTime::from_secs_f64(-1.0), SimTime::ZERO);
    }

    fn draws(seed: u64, label: &str) -> Vec<u64> {
        let mut r = rng_stream(seed, label).unwrap();
        (0..16).map(|_| r.random()).collect()
    }

    #[test]
    fn streams_reproducible_and_separated() {
        assert_eq!(draws(7, "shadow-fading"), draws(7, "shadow-fading"));
        assert_ne!(draws(7, "shadow-fading"), draws(7, "los-draw"));
        assert_ne!(draws(7, "shadow-fading"), draws(8, "shadow-fading"));
    }

    #[test]
    fn empty_label_rejected() {
        assert!(matches!(rng_stream(1, ""), Err(SimError::EmptyStreamLabel)));
    }

    proptest::proptest! {
        #[test]
        fn dispatch_order_is_nondecreasing(times in proptest::collection::vec(0u64..1_000, 1..200)) {
            let mut q = EventQueue::new();
            for (i, t) in times.iter().enumerate() {
                q.schedule(SimTime::from_nanos(*t), i).unwrap();
            }
            let mut last = (SimTime::ZERO, 0usize);
            let mut first = true;
            while let Some((t, _, i)) = q.pop_until(SimTime::MAX) {
                if !first {
                    proptest::prop_assert!(t > last.0 || (t == last.0 && i > last.1));
                }
                first = false;
                last = (t, i);
            }
        }
    }
}
