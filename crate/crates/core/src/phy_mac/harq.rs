//! Stop-and-wait HARQ with a bounded number of retransmissions. Feedback is
//! error-free; a retransmission is an independent decoding attempt.

use rand::Rng;

use crate::engine::SimTime;
use crate::pdcp::{LegPath, Sn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TbLink {
    pub gnb: usize,
    pub ue: usize,
    pub beam: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportBlock {
    pub tb_id: u64,
    pub carried_sdus: Vec<Sn>,
    pub size_bytes: u32,
    pub link: TbLink,
    pub leg: LegPath,
    /// 1 for the first transmission.
    pub attempt: u8,
}

impl TransportBlock {
    /// Next attempt of the same TB, or `None` once `max_attempts` is reached.
    pub fn retransmission(&self, max_attempts: u8) -> Option<TransportBlock> {
        (self.attempt < max_attempts).then(|| TransportBlock {
            attempt: self.attempt + 1,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarqOutcome {
    Pending,
    Acked,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    Ack,
    Nack,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarqProcess {
    pub tb: TransportBlock,
    pub tx_complete: SimTime,
    /// When the UE's payload arrives (valid only if decoded).
    pub arrival: SimTime,
    pub feedback_due: SimTime,
    pub decoded: bool,
    pub outcome: HarqOutcome,
}

impl HarqProcess {
    /// Resolves the pending outcome. Returns `None` if already resolved.
    pub fn resolve(&mut self) -> Option<Feedback> {
        if self.outcome != HarqOutcome::Pending {
            return None;
        }
        if self.decoded {
            self.outcome = HarqOutcome::Acked;
            Some(Feedback::Ack)
        } else {
            self.outcome = HarqOutcome::Failed;
            Some(Feedback::Nack)
        }
    }

    pub fn feedback(&self) -> Option<Feedback> {
        match self.outcome {
            HarqOutcome::Pending => None,
            HarqOutcome::Acked => Some(Feedback::Ack),
            HarqOutcome::Failed => Some(Feedback::Nack),
        }
    }
}

/// Feedback reaches the gNB after the data's downlink flight, the UE's
/// processing time and the uplink flight back.
pub fn feedback_due(tx_complete: SimTime, one_way_delay: SimTime, processing: SimTime) -> SimTime {
    tx_complete + one_way_delay + processing + one_way_delay
}

pub struct TxTiming {
    pub tx_complete: SimTime,
    pub one_way_delay: SimTime,
    pub processing: SimTime,
}

pub fn transmit<R: Rng + ?Sized>(
    tb: TransportBlock,
    block_error_prob: f64,
    timing: TxTiming,
    rng: &mut R,
) -> HarqProcess {
    let decoded = rng.random::<f64>() >= block_error_prob;
    HarqProcess {
        arrival: timing.tx_complete + timing.one_way_delay,
        feedback_due: feedback_due(timing.tx_complete, timing.one_way_delay, timing.processing),
        tx_complete: timing.tx_complete,
        tb,
        decoded,
        outcome: HarqOutcome::Pending,
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeedbackActions {
    pub retransmit: Option<TransportBlock>,
    pub failed: Option<TransportBlock>,
    /// Primary-leg NACK: the PDCP duplication controller must be told.
    pub notify_duplication: bool,
}

pub fn on_feedback(process: &HarqProcess, max_attempts: u8) -> FeedbackActions {
    match process.feedback() {
        Some(Feedback::Nack) => {
            let retransmit = process.tb.retransmission(max_attempts);
            FeedbackActions {
                failed: retransmit.is_none().then(|| process.tb.clone()),
                retransmit,
                notify_duplication: process.tb.leg == LegPath::Mn,
            }
        }
        _ => FeedbackActions::default(),
    }
}
