//! One simulation run of the two-satellite scenario.
//!
//! Channel, placement and cell-selection draws come from their own streams,
//! so every duplication mode sees the same UEs and the same LOS history for
//! a given seed. Decoding draws are keyed by `(ue, cell, attempt, sn)` for the
//! same reason: a primary-leg transmission succeeds or fails identically in
//! every mode.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::channel::{received_power, ChannelDraws, ChannelTable, LinkBudgetParams, LinkState};
use crate::config::{CbrPhase, ScenarioConfig};
use crate::engine::{rng_stream, EventHandle, EventKind, EventQueue, SimTime, Target, TraceLog};
use crate::error::SimError;
use crate::geometry::{self, GeoPosition, SatelliteState};
use crate::mc::{cell_select, evaluate_a3, xn_forward, McBinding, XnLink};
use crate::pdcp::{
    on_primary_nack, tx_submit, Discard, DuplicationMode, DuplicationPolicy, DuplicationState,
    LegPath, PdcpSdu, ReorderBuffer, ReorderWindow, Sn, TimerAction, TxLegs,
};
use crate::phy_mac::{
    bler, on_feedback, rsrp, sinr, transmit, BlerCurve, HarqProcess, QueueDemand, RoundRobin,
    TbLink, TransportBlock, TxTiming, WraparoundLayout,
};
use crate::stats::{RunSummary, UeCounters};
use crate::traffic::{CbrFlow, FullBufferSource};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Keep the human-readable event log.
    pub trace: bool,
    /// Keep every UE's delivered sequence numbers in order.
    pub record_deliveries: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UeDiagnostics {
    pub mn: usize,
    pub sn: Option<usize>,
    pub sn_bound_at: Option<SimTime>,
    pub first_copy_at: Option<SimTime>,
    /// Post-warmup SDUs submitted while an SN was bound.
    pub submitted_with_sn: u64,
    pub primary_nacks: u64,
    /// SDUs still in flight or buffered when the drain window closed.
    pub unresolved: u64,
    pub lost_in_flight: u64,
    pub discarded_late: u64,
    pub deliveries: Vec<Sn>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub ues: Vec<UeDiagnostics>,
    pub trace_digest: u64,
    pub events_dispatched: u64,
    pub trace: Option<Vec<String>>,
    /// SN-leg transmissions that started before submission + Xn delay.
    pub xn_order_violations: u64,
    /// HARQ feedback delivered earlier than completion + one-way delay.
    pub feedback_timing_violations: u64,
    pub max_attempt_seen: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FateState {
    Pending,
    Held,
    Delivered,
    Lost,
    DiscardedLate,
}

#[derive(Debug, Clone, Copy)]
struct Fate {
    legs_outstanding: u8,
    state: FateState,
    counted: bool,
}

struct Ue {
    pos: GeoPosition,
    links: Vec<LinkState>,
    binding: McBinding,
    dup: DuplicationState,
    dup_expiry: Option<EventHandle>,
    rx: ReorderBuffer,
    reorder_timer: Option<EventHandle>,
    flow: CbrFlow,
    counters: UeCounters,
    fates: HashMap<Sn, Fate>,
    diag: UeDiagnostics,
}

struct QueuedTb {
    tb: TransportBlock,
    submitted_at: SimTime,
}

struct Interferer {
    source: FullBufferSource,
    rr: RoundRobin,
    rel_gain_db: f64,
}

struct Cell {
    queues: BTreeMap<usize, VecDeque<QueuedTb>>,
    rr: RoundRobin,
    interferers: Vec<Interferer>,
}

enum Ev {
    Traffic { ue: usize },
    XnArrival { cell: usize, sdu: PdcpSdu, submitted_at: SimTime },
    Slot,
    TxComplete { tb: TransportBlock, interferer_gains_db: Vec<f64> },
    Feedback { process: HarqProcess, one_way: SimTime },
    Arrival { ue: usize, sn: Sn },
    ReorderExpiry { ue: usize },
    DupExpiry { ue: usize },
    Mobility,
    Measurement,
}

impl Ev {
    fn kind_and_target(&self) -> (EventKind, Target) {
        match self {
            Ev::Traffic { ue } => (EventKind::TrafficTick, Target::Ue(*ue)),
            Ev::XnArrival { cell, .. } => (EventKind::PacketArrival, Target::Cell(*cell)),
            Ev::Slot => (EventKind::SlotStart, Target::All),
            Ev::TxComplete { tb, .. } => (EventKind::TxComplete, Target::Ue(tb.link.ue)),
            Ev::Feedback { process, .. } => (EventKind::HarqFeedback, Target::Cell(process.tb.link.gnb)),
            Ev::Arrival { ue, .. } => (EventKind::PacketArrival, Target::Ue(*ue)),
            Ev::ReorderExpiry { ue } => (EventKind::ReorderTimerExpiry, Target::Ue(*ue)),
            Ev::DupExpiry { ue } => (EventKind::DuplicationTimerExpiry, Target::Ue(*ue)),
            Ev::Mobility => (EventKind::MobilityTick, Target::All),
            Ev::Measurement => (EventKind::MeasurementTick, Target::All),
        }
    }
}

/// A configured run, ready to execute.
pub struct Simulation {
    seed: u64,
    mode: DuplicationMode,
    policy: DuplicationPolicy,
    window: ReorderWindow,
    table: ChannelTable,
    scenario: String,
    budget: LinkBudgetParams,
    curve: BlerCurve,
    pl_gas: f64,
    pl_scint: f64,
    sn_offset_db: f64,
    xn: XnLink,
    slot: SimTime,
    slot_resources: u32,
    resources_per_tb: u32,
    max_attempts: u8,
    harq_processing: SimTime,
    mobility_tick: SimTime,
    measurement_period: SimTime,
    warmup: SimTime,
    drain: SimTime,
    sats: Vec<SatelliteState>,
    sat_pos: Vec<GeoPosition>,
    ues: Vec<Ue>,
    cells: Vec<Cell>,
    queue: EventQueue<Ev>,
    trace: TraceLog,
    los_rng: ChaCha12Rng,
    sf_rng: ChaCha12Rng,
    decode_rng: ChaCha12Rng,
    next_tb_id: u64,
    record_deliveries: bool,
    xn_order_violations: u64,
    feedback_timing_violations: u64,
    max_attempt_seen: u8,
    traffic_end: SimTime,
}

fn decode_key(ue: usize, cell: usize, attempt: u8, sn: Sn) -> u128 {
    let key = ((ue as u64 & 0xffff) << 48)
        | ((cell as u64 & 0xf) << 44)
        | ((u64::from(attempt) & 0xf) << 40)
        | (sn & ((1 << 40) - 1));
    // one ChaCha block (16 words) per key
    u128::from(key) << 4
}

impl Simulation {
    pub fn new(
        cfg: &ScenarioConfig,
        mode: DuplicationMode,
        seed: u64,
        opts: RunOptions,
    ) -> Result<Self, SimError> {
        cfg.validate()?;
        let table = cfg.channel_table()?;
        let scenario = cfg.channel.scenario.clone();
        let mut policy = cfg.duplication_policy();
        policy.mode = mode;
        let window = cfg.reorder_window()?;

        let mut placement_rng = rng_stream(seed, "ue-placement")?;
        let mut phase_rng = rng_stream(seed, "cbr-phase")?;
        let mut los_rng = rng_stream(seed, "los-draw")?;
        let mut sf_rng = rng_stream(seed, "shadow-fading")?;
        let decode_rng = rng_stream(seed, "harq-decode")?;

        let alt = cfg.satellites.orbit_altitude_m;
        let sats: Vec<SatelliteState> = cfg
            .satellites
            .start_positions
            .iter()
            .map(|[lat, lon]| SatelliteState {
                start: GeoPosition::new(*lat, *lon, alt),
                speed_mps: cfg.satellites.ground_speed_mps,
                heading_deg: cfg.satellites.heading_deg,
            })
            .collect();
        let sat_pos: Vec<GeoPosition> = sats.iter().map(|s| s.propagate(0.0)).collect();

        let budget = cfg.link_budget();
        let (pl_gas, pl_scint) = (cfg.channel.pl_gas_db, cfg.channel.pl_scint_db);
        let target = cfg.target();
        let interval = cfg.cbr_interval();
        let mut ues = Vec::with_capacity(cfg.beams.ue_count);
        for id in 0..cfg.beams.ue_count {
            let pos = geometry::place_uniform_disc(&target, cfg.beams.ue_placement_radius_m, &mut placement_rng);
            let links = sat_pos
                .iter()
                .map(|sat| {
                    LinkState::new(
                        sat,
                        &pos,
                        cfg.beams.carrier_hz,
                        cfg.channel.los_cube_side_m,
                        &table,
                        &scenario,
                        ChannelDraws { los: &mut los_rng, sf: &mut sf_rng },
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            let measured: Vec<(usize, f64)> = links
                .iter()
                .enumerate()
                .map(|(c, l)| (c, rsrp(l, &budget, pl_gas, pl_scint)))
                .collect();
            let mn = cell_select(id, &measured)?;
            let phase = match cfg.traffic.cbr_phase {
                CbrPhase::Zero => SimTime::ZERO,
                CbrPhase::Random => SimTime::from_nanos(phase_rng.random_range(0..interval.as_nanos())),
            };
            ues.push(Ue {
                pos,
                links,
                binding: McBinding::new(id, mn),
                dup: DuplicationState::default(),
                dup_expiry: None,
                rx: ReorderBuffer::new(window),
                reorder_timer: None,
                flow: CbrFlow::new(id, cfg.traffic.cbr_packet_bytes, interval, phase),
                counters: UeCounters::default(),
                fates: HashMap::new(),
                diag: UeDiagnostics { mn, ..Default::default() },
            });
        }

        let layout = WraparoundLayout::hexagonal(cfg.beams.wraparound_rings, cfg.beams.frf);
        let cells = (0..sats.len())
            .map(|c| Cell {
                queues: BTreeMap::new(),
                rr: RoundRobin::new(),
                interferers: layout
                    .co_channel()
                    .enumerate()
                    .map(|(i, b)| Interferer {
                        source: FullBufferSource { ue: 1000 * (c + 1) + i },
                        rr: RoundRobin::new(),
                        rel_gain_db: cfg.beams.wraparound_ring_gain_db[usize::from(b.ring) - 1],
                    })
                    .collect(),
            })
            .collect();

        Ok(Self {
            seed,
            mode,
            policy,
            window,
            table,
            scenario,
            budget,
            curve: cfg.bler_curve(),
            pl_gas,
            pl_scint,
            sn_offset_db: cfg.mc.sn_offset_db,
            xn: XnLink { delay: cfg.xn_delay(), endpoints: (0, 1) },
            slot: cfg.slot(),
            slot_resources: cfg.phy.slot_resources,
            resources_per_tb: cfg.phy.resources_per_tb,
            max_attempts: 1 + cfg.phy.harq_max_retx,
            harq_processing: cfg.harq_processing(),
            mobility_tick: cfg.mobility_tick(),
            measurement_period: cfg.measurement_period(),
            warmup: cfg.warmup(),
            drain: cfg.drain(),
            sats,
            sat_pos,
            ues,
            cells,
            queue: EventQueue::new(),
            trace: TraceLog::new(opts.trace),
            los_rng,
            sf_rng,
            decode_rng,
            next_tb_id: 0,
            record_deliveries: opts.record_deliveries,
            xn_order_violations: 0,
            feedback_timing_violations: 0,
            max_attempt_seen: 0,
            traffic_end: SimTime::ZERO,
        })
    }

    /// Runs traffic over `[0, t_end)`, then drains in-flight SDUs. Statistics
    /// cover SDUs created in `[warmup, t_end)`.
    pub fn run_until(mut self, t_end: SimTime) -> Result<RunOutput, SimError> {
        self.traffic_end = t_end;
        let horizon = t_end + self.drain;
        for id in 0..self.ues.len() {
            let first = self.ues[id].flow.next_emit;
            if first < t_end {
                self.queue.schedule(first, Ev::Traffic { ue: id })?;
            }
        }
        if t_end > SimTime::ZERO {
            self.queue.schedule(SimTime::ZERO, Ev::Slot)?;
            self.queue.schedule(self.mobility_tick, Ev::Mobility)?;
            self.queue.schedule(self.measurement_period, Ev::Measurement)?;
        }

        while let Some((now, _, ev)) = self.queue.pop_until(horizon) {
            let (kind, target) = ev.kind_and_target();
            self.trace.record(now, kind, target);
            self.dispatch(now, ev, horizon)?;
        }
        self.queue.advance_to(horizon);
        Ok(self.finish())
    }

    fn dispatch(&mut self, now: SimTime, ev: Ev, horizon: SimTime) -> Result<(), SimError> {
        match ev {
            Ev::Traffic { ue } => self.on_traffic(now, ue),
            Ev::XnArrival { cell, sdu, submitted_at } => {
                self.enqueue(cell, sdu, submitted_at);
                Ok(())
            }
            Ev::Slot => self.on_slot(now, horizon),
            Ev::TxComplete { tb, interferer_gains_db } => self.on_tx_complete(now, tb, &interferer_gains_db),
            Ev::Feedback { mut process, one_way } => self.on_harq_feedback(now, &mut process, one_way),
            Ev::Arrival { ue, sn } => self.on_arrival(now, ue, sn),
            Ev::ReorderExpiry { ue } => self.on_reorder_expiry(now, ue),
            Ev::DupExpiry { ue } => {
                self.ues[ue].dup_expiry = None;
                Ok(())
            }
            Ev::Mobility => self.on_mobility(now, horizon),
            Ev::Measurement => self.on_measurement(now, horizon),
        }
    }

    fn on_traffic(&mut self, now: SimTime, id: usize) -> Result<(), SimError> {
        let counted = now >= self.warmup && now < self.traffic_end;
        let ue = &mut self.ues[id];
        let sdu = ue.flow.cbr_tick(now);
        let sn_bound = ue.binding.sn_established();
        let legs = tx_submit(sdu, &self.policy, &mut ue.dup, sn_bound, now);
        if counted {
            ue.counters.sent += 1;
            if sn_bound {
                ue.diag.submitted_with_sn += 1;
            }
        }
        ue.fates.insert(
            sdu.sn,
            Fate { legs_outstanding: legs.len() as u8, state: FateState::Pending, counted },
        );
        let mn = ue.binding.mn;
        match legs {
            TxLegs::Single(primary) => self.enqueue(mn, primary, now),
            TxLegs::Duplicated { primary, copy } => {
                if counted {
                    ue.counters.duplicates_created += 1;
                }
                ue.diag.first_copy_at.get_or_insert(now);
                let sn_cell = ue.binding.sn.expect("copies only exist once an SN is bound");
                self.enqueue(mn, primary, now);
                let (at, copy) = xn_forward(copy, &self.xn, now);
                self.queue.schedule(at, Ev::XnArrival { cell: sn_cell, sdu: copy, submitted_at: now })?;
            }
        }
        let next = self.ues[id].flow.next_emit;
        if next < self.traffic_end {
            self.queue.schedule(next, Ev::Traffic { ue: id })?;
        }
        Ok(())
    }

    fn enqueue(&mut self, cell: usize, sdu: PdcpSdu, submitted_at: SimTime) {
        let tb = TransportBlock {
            tb_id: self.next_tb_id,
            carried_sdus: vec![sdu.sn],
            size_bytes: sdu.size_bytes,
            link: TbLink { gnb: cell, ue: sdu.flow, beam: 0 },
            leg: sdu.path,
            attempt: 1,
        };
        self.next_tb_id += 1;
        self.cells[cell]
            .queues
            .entry(sdu.flow)
            .or_default()
            .push_back(QueuedTb { tb, submitted_at });
    }

    fn on_slot(&mut self, now: SimTime, horizon: SimTime) -> Result<(), SimError> {
        let done = now + self.slot;
        for c in 0..self.cells.len() {
            let cell = &mut self.cells[c];
            let demands: Vec<QueueDemand> = cell
                .queues
                .iter()
                .map(|(ue, q)| QueueDemand { queue: *ue, backlog_tbs: q.len() as u32 })
                .collect();
            let grants = cell.rr.allocate(&demands, self.slot_resources, self.resources_per_tb);
            if grants.is_empty() {
                continue;
            }
            // Interferer beams poll their full-buffer UE each slot the center beam is on air.
            let gains: Vec<f64> = cell
                .interferers
                .iter_mut()
                .filter_map(|i| {
                    let g = i.rr.allocate(
                        &[QueueDemand { queue: i.source.ue, backlog_tbs: i.source.backlog_tbs() }],
                        self.slot_resources,
                        self.resources_per_tb,
                    );
                    let used: u32 = g.iter().map(|a| i.source.full_buffer_poll(a.resources)).sum();
                    (used > 0).then_some(i.rel_gain_db)
                })
                .collect();
            for grant in grants {
                for _ in 0..grant.tbs {
                    let q = cell.queues.get_mut(&grant.queue).expect("granted queue exists");
                    let Some(item) = q.pop_front() else { break };
                    if item.tb.leg == LegPath::Sn && item.tb.attempt == 1 && now < item.submitted_at + self.xn.delay {
                        self.xn_order_violations += 1;
                    }
                    self.max_attempt_seen = self.max_attempt_seen.max(item.tb.attempt);
                    self.queue.schedule(done, Ev::TxComplete { tb: item.tb, interferer_gains_db: gains.clone() })?;
                }
            }
            cell.queues.retain(|_, q| !q.is_empty());
        }
        if done <= horizon {
            self.queue.schedule(done, Ev::Slot)?;
        }
        Ok(())
    }

    fn on_tx_complete(&mut self, now: SimTime, tb: TransportBlock, gains: &[f64]) -> Result<(), SimError> {
        let link = &self.ues[tb.link.ue].links[tb.link.gnb];
        let pl = link.breakdown(self.pl_gas, self.pl_scint).pl_total;
        let c = received_power(&self.budget, pl);
        let interferers: Vec<f64> = gains.iter().map(|g| c + g).collect();
        let s = sinr(c, &interferers, self.budget.noise_dbm());
        let p = bler(s, &self.curve);
        let one_way = SimTime::from_secs_f64(link.propagation_delay_s());
        let sn = tb.carried_sdus[0];
        self.decode_rng.set_word_pos(decode_key(tb.link.ue, tb.link.gnb, tb.attempt, sn));
        let process = transmit(
            tb,
            p,
            TxTiming { tx_complete: now, one_way_delay: one_way, processing: self.harq_processing },
            &mut self.decode_rng,
        );
        if process.decoded {
            self.queue.schedule(process.arrival, Ev::Arrival { ue: process.tb.link.ue, sn })?;
        }
        let due = process.feedback_due;
        self.queue.schedule(due, Ev::Feedback { process, one_way })?;
        Ok(())
    }

    fn on_harq_feedback(&mut self, now: SimTime, process: &mut HarqProcess, one_way: SimTime) -> Result<(), SimError> {
        if now < process.tx_complete + one_way {
            self.feedback_timing_violations += 1;
        }
        process.resolve();
        let actions = on_feedback(process, self.max_attempts);
        let ue_id = process.tb.link.ue;
        if let Some(retx) = actions.retransmit {
            let cell = retx.link.gnb;
            self.cells[cell]
                .queues
                .entry(ue_id)
                .or_default()
                .push_front(QueuedTb { tb: retx, submitted_at: now });
        }
        if let Some(failed) = actions.failed {
            let ue = &mut self.ues[ue_id];
            for sn in failed.carried_sdus {
                if let Some(f) = ue.fates.get_mut(&sn) {
                    f.legs_outstanding = f.legs_outstanding.saturating_sub(1);
                    if f.legs_outstanding == 0 && f.state == FateState::Pending {
                        f.state = FateState::Lost;
                    }
                }
            }
        }
        if actions.notify_duplication {
            let ue = &mut self.ues[ue_id];
            ue.diag.primary_nacks += 1;
            if let Some(until) = on_primary_nack(&mut ue.dup, now, &self.policy) {
                if let Some(h) = ue.dup_expiry.take() {
                    self.queue.cancel(h);
                }
                let h = self.queue.schedule(until, Ev::DupExpiry { ue: ue_id })?;
                self.ues[ue_id].dup_expiry = Some(h);
            }
        }
        Ok(())
    }

    fn on_arrival(&mut self, now: SimTime, id: usize, sn: Sn) -> Result<(), SimError> {
        let ue = &mut self.ues[id];
        if let Some(f) = ue.fates.get_mut(&sn) {
            f.legs_outstanding = f.legs_outstanding.saturating_sub(1);
        }
        let outcome = ue.rx.rx_ingest(sn, now);
        match outcome.discarded {
            Some(Discard::Duplicate) => {
                if ue.fates.get(&sn).is_some_and(|f| f.counted) {
                    ue.counters.duplicates_discarded += 1;
                }
            }
            Some(Discard::Late) => {
                if let Some(f) = ue.fates.get_mut(&sn) {
                    if f.state == FateState::Pending {
                        f.state = FateState::DiscardedLate;
                    }
                }
            }
            None => {
                if let Some(f) = ue.fates.get_mut(&sn) {
                    if f.state == FateState::Pending {
                        f.state = FateState::Held;
                    }
                }
            }
        }
        self.deliver(id, &outcome.delivered);
        self.apply_reorder_timer(now, id, outcome.timer)
    }

    fn on_reorder_expiry(&mut self, now: SimTime, id: usize) -> Result<(), SimError> {
        self.ues[id].reorder_timer = None;
        let outcome = self.ues[id].rx.on_reorder_expiry(now);
        self.deliver(id, &outcome.delivered);
        self.apply_reorder_timer(now, id, outcome.timer)
    }

    fn deliver(&mut self, id: usize, sns: &[Sn]) {
        let ue = &mut self.ues[id];
        for sn in sns {
            if let Some(f) = ue.fates.get_mut(sn) {
                debug_assert_ne!(f.state, FateState::Delivered);
                f.state = FateState::Delivered;
                if f.counted {
                    ue.counters.delivered += 1;
                }
            }
            if self.record_deliveries {
                ue.diag.deliveries.push(*sn);
            }
        }
    }

    fn apply_reorder_timer(&mut self, now: SimTime, id: usize, action: TimerAction) -> Result<(), SimError> {
        match action {
            TimerAction::None => {}
            TimerAction::Stop => {
                if let Some(h) = self.ues[id].reorder_timer.take() {
                    self.queue.cancel(h);
                }
            }
            TimerAction::Start | TimerAction::Restart => {
                if let Some(h) = self.ues[id].reorder_timer.take() {
                    self.queue.cancel(h);
                }
                if let Some(d) = self.window.timer_duration() {
                    let h = self.queue.schedule(now + d, Ev::ReorderExpiry { ue: id })?;
                    self.ues[id].reorder_timer = Some(h);
                }
            }
        }
        Ok(())
    }

    fn on_mobility(&mut self, now: SimTime, horizon: SimTime) -> Result<(), SimError> {
        let t = now.as_secs_f64();
        for (c, s) in self.sats.iter().enumerate() {
            self.sat_pos[c] = s.propagate(t);
        }
        for id in 0..self.ues.len() {
            for c in 0..self.sat_pos.len() {
                let sat = self.sat_pos[c];
                let ue = &mut self.ues[id];
                let link = &mut ue.links[c];
                link.update_geometry(&sat, &ue.pos);
                if geometry::los_resample_due(&link.anchor, &sat) {
                    link.resample(
                        &sat,
                        &self.table,
                        &self.scenario,
                        ChannelDraws { los: &mut self.los_rng, sf: &mut self.sf_rng },
                    )?;
                    self.trace.record(now, EventKind::ChannelUpdate, Target::Ue(id));
                }
            }
        }
        let next = now + self.mobility_tick;
        if next <= horizon {
            self.queue.schedule(next, Ev::Mobility)?;
        }
        Ok(())
    }

    fn on_measurement(&mut self, now: SimTime, horizon: SimTime) -> Result<(), SimError> {
        for ue in self.ues.iter_mut() {
            if ue.binding.sn_established() {
                continue;
            }
            let mn = ue.binding.mn;
            let serving = rsrp(&ue.links[mn], &self.budget, self.pl_gas, self.pl_scint);
            for (c, link) in ue.links.iter().enumerate() {
                if c == mn {
                    continue;
                }
                let neighbor = rsrp(link, &self.budget, self.pl_gas, self.pl_scint);
                if evaluate_a3(serving, neighbor, self.sn_offset_db) && ue.binding.bind_sn(c, now) {
                    ue.diag.sn = Some(c);
                    ue.diag.sn_bound_at = Some(now);
                    break;
                }
            }
        }
        let next = now + self.measurement_period;
        if next <= horizon && next < self.traffic_end {
            self.queue.schedule(next, Ev::Measurement)?;
        }
        Ok(())
    }

    fn finish(self) -> RunOutput {
        let mut per_ue = Vec::with_capacity(self.ues.len());
        let mut diags = Vec::with_capacity(self.ues.len());
        for mut ue in self.ues {
            for f in ue.fates.values().filter(|f| f.counted) {
                match f.state {
                    FateState::Delivered => {}
                    FateState::Lost => {
                        ue.diag.lost_in_flight += 1;
                        ue.counters.lost += 1;
                    }
                    FateState::DiscardedLate => {
                        ue.diag.discarded_late += 1;
                        ue.counters.lost += 1;
                    }
                    FateState::Pending | FateState::Held => {
                        ue.diag.unresolved += 1;
                        ue.counters.lost += 1;
                    }
                }
            }
            per_ue.push(ue.counters);
            diags.push(ue.diag);
        }
        RunOutput {
            summary: RunSummary { run_seed: self.seed, pd_mode: self.mode, per_ue },
            ues: diags,
            trace_digest: self.trace.digest(),
            events_dispatched: self.trace.count(),
            trace: self.trace.lines().map(<[String]>::to_vec),
            xn_order_violations: self.xn_order_violations,
            feedback_timing_violations: self.feedback_timing_violations,
            max_attempt_seen: self.max_attempt_seen,
        }
    }
}

/// Runs the configured scenario for the configured simulation time.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    mode: DuplicationMode,
    seed: u64,
    opts: RunOptions,
) -> Result<RunOutput, SimError> {
    Simulation::new(cfg, mode, seed, opts)?.run_until(cfg.simulation_time())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_cfg(secs: f64) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.simulation.simulation_time_s = secs;
        cfg.simulation.warmup_s = 0.5;
        cfg
    }

    #[test]
    fn zero_horizon_gives_empty_stats() {
        let cfg = short_cfg(2.0);
        let out = Simulation::new(&cfg, DuplicationMode::Blind, 1, RunOptions::default())
            .unwrap()
            .run_until(SimTime::ZERO)
            .unwrap();
        assert!(out.summary.per_ue.iter().all(|c| c.sent == 0));
        assert!(out.summary.success_rates().is_empty());
    }

    #[test]
    fn two_second_run_counts_post_warmup_sdus() {
        let out = run_scenario(&short_cfg(2.0), DuplicationMode::Off, 3, RunOptions::default()).unwrap();
        for c in &out.summary.per_ue {
            assert_eq!(c.sent, 75);
            assert_eq!(c.delivered + c.lost, c.sent);
            assert_eq!(c.duplicates_created, 0);
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let cfg = short_cfg(1.5);
        let a = run_scenario(&cfg, DuplicationMode::HarqTimer, 5, RunOptions::default()).unwrap();
        let b = run_scenario(&cfg, DuplicationMode::HarqTimer, 5, RunOptions::default()).unwrap();
        assert_eq!(a.trace_digest, b.trace_digest);
        assert_eq!(a.summary, b.summary);
        let c = run_scenario(&cfg, DuplicationMode::HarqTimer, 6, RunOptions::default()).unwrap();
        assert_ne!(a.trace_digest, c.trace_digest);
    }

    #[test]
    fn trace_lines_are_time_kind_target() {
        let cfg = short_cfg(0.6);
        let opts = RunOptions { trace: true, ..Default::default() };
        let out = run_scenario(&cfg, DuplicationMode::Blind, 1, opts).unwrap();
        let lines = out.trace.unwrap();
        assert_eq!(lines.len() as u64, out.events_dispatched);
        let first: Vec<&str> = lines[0].split(' ').collect();
        assert_eq!(first.len(), 3);
        assert!(first[0].parse::<f64>().is_ok());
        assert!(lines.iter().any(|l| l.contains(" traffic-tick ue0")));
    }

    #[test]
    fn decode_keys_are_distinct() {
        let a = decode_key(1, 0, 1, 7);
        assert_ne!(a, decode_key(1, 1, 1, 7));
        assert_ne!(a, decode_key(1, 0, 2, 7));
        assert_ne!(a, decode_key(2, 0, 1, 7));
        assert_ne!(a, decode_key(1, 0, 1, 8));
    }
}
