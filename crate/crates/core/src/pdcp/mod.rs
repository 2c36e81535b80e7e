//! PDCP: transmit-side duplication policies and receive-side duplicate
//! discard with optional reordering.

mod duplication;
mod reorder;

pub use duplication::{
    on_primary_nack, tx_submit, DuplicationMode, DuplicationPolicy, DuplicationState, TxLegs,
};
pub use reorder::{
    reorder_window_bounds, Discard, ReorderBuffer, ReorderWindow, RxOutcome, TimerAction,
    MAX_FINITE_REORDERING_S,
};

use crate::engine::SimTime;

/// PDCP sequence number. Unbounded; no wraparound.
pub type Sn = u64;

/// Which leg an SDU copy travels on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LegPath {
    Mn,
    Sn,
}

impl LegPath {
    pub fn as_str(self) -> &'static str {
        match self {
            LegPath::Mn => "mn",
            LegPath::Sn => "sn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PdcpSdu {
    pub sn: Sn,
    pub flow: usize,
    pub size_bytes: u32,
    pub created_at: SimTime,
    pub path: LegPath,
}
