use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{LegPath, PdcpSdu};
use crate::engine::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicationMode {
    Off,
    Blind,
    HarqTimer,
}

impl DuplicationMode {
    pub const ALL: [DuplicationMode; 3] = [
        DuplicationMode::Off,
        DuplicationMode::Blind,
        DuplicationMode::HarqTimer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DuplicationMode::Off => "off",
            DuplicationMode::Blind => "blind",
            DuplicationMode::HarqTimer => "harq_timer",
        }
    }
}

impl fmt::Display for DuplicationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DuplicationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(DuplicationMode::Off),
            "blind" => Ok(DuplicationMode::Blind),
            "harq_timer" | "harq" => Ok(DuplicationMode::HarqTimer),
            other => Err(format!(
                "unknown duplication mode `{other}` (expected off, blind or harq_timer)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuplicationPolicy {
    pub mode: DuplicationMode,
    /// How long duplication stays on after a primary-leg NACK.
    pub dup_duration: SimTime,
}

impl DuplicationPolicy {
    pub fn new(mode: DuplicationMode, dup_duration: SimTime) -> Self {
        Self { mode, dup_duration }
    }
}

/// Per-UE duplication timer. Active at `t` iff `t < active_until`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DuplicationState {
    pub active_until: Option<SimTime>,
    pub duplicates_created: u64,
}

impl DuplicationState {
    pub fn is_active(&self, now: SimTime) -> bool {
        self.active_until.is_some_and(|until| now < until)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TxLegs {
    Single(PdcpSdu),
    Duplicated { primary: PdcpSdu, copy: PdcpSdu },
}

impl TxLegs {
    pub fn len(&self) -> usize {
        match self {
            TxLegs::Single(_) => 1,
            TxLegs::Duplicated { .. } => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_duplicated(&self) -> bool {
        matches!(self, TxLegs::Duplicated { .. })
    }
}

/// Decides whether an SDU arriving at the MN's PDCP also goes to the SN.
///
/// Without an established SN there is only one leg, whatever the policy.
pub fn tx_submit(
    sdu: PdcpSdu,
    policy: &DuplicationPolicy,
    state: &mut DuplicationState,
    sn_established: bool,
    now: SimTime,
) -> TxLegs {
    let primary = PdcpSdu {
        path: LegPath::Mn,
        ..sdu
    };
    let duplicate = sn_established
        && match policy.mode {
            DuplicationMode::Off => false,
            DuplicationMode::Blind => true,
            DuplicationMode::HarqTimer => state.is_active(now),
        };
    if duplicate {
        state.duplicates_created += 1;
        let copy = PdcpSdu {
            path: LegPath::Sn,
            ..primary
        };
        TxLegs::Duplicated { primary, copy }
    } else {
        TxLegs::Single(primary)
    }
}

/// Restarts the duplication timer on a NACK from the primary leg. Returns the
/// new deadline, or `None` when the policy does not use the timer.
pub fn on_primary_nack(
    state: &mut DuplicationState,
    now: SimTime,
    policy: &DuplicationPolicy,
) -> Option<SimTime> {
    if policy.mode != DuplicationMode::HarqTimer {
        return None;
    }
    let until = now + policy.dup_duration;
    state.active_until = Some(until);
    Some(until)
}
