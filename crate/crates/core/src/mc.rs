//! Multi-connectivity control: initial cell selection, A3-triggered
//! secondary-node addition and Xn forwarding of duplicate SDUs.

use crate::engine::SimTime;
use crate::error::SimError;
use crate::pdcp::PdcpSdu;

pub type CellId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McBinding {
    pub ue: usize,
    pub mn: CellId,
    pub sn: Option<CellId>,
    pub established_at: Option<SimTime>,
}

impl McBinding {
    pub fn new(ue: usize, mn: CellId) -> Self {
        Self {
            ue,
            mn,
            sn: None,
            established_at: None,
        }
    }

    pub fn sn_established(&self) -> bool {
        self.sn.is_some()
    }

    /// Binds the secondary node. A binding is set at most once and never to
    /// the master node; returns whether anything changed.
    pub fn bind_sn(&mut self, sn: CellId, now: SimTime) -> bool {
        if self.sn.is_some() || sn == self.mn {
            return false;
        }
        self.sn = Some(sn);
        self.established_at = Some(now);
        true
    }
}

/// Strongest cell by RSRP; ties go to the lower cell id.
pub fn cell_select(ue: usize, cells: &[(CellId, f64)]) -> Result<CellId, SimError> {
    cells
        .iter()
        .copied()
        .reduce(|best, c| {
            if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) {
                c
            } else {
                best
            }
        })
        .map(|(cell, _)| cell)
        .ok_or(SimError::NoCandidateCells { ue })
}

/// A3 entry condition: neighbour plus offset reaches the serving level.
pub fn evaluate_a3(serving_rsrp_dbm: f64, neighbor_rsrp_dbm: f64, offset_db: f64) -> bool {
    neighbor_rsrp_dbm + offset_db >= serving_rsrp_dbm
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XnLink {
    pub delay: SimTime,
    pub endpoints: (CellId, CellId),
}

/// Time at which the forwarded copy lands in the SN's transmission queue.
pub fn xn_forward(sdu: PdcpSdu, link: &XnLink, now: SimTime) -> (SimTime, PdcpSdu) {
    (now + link.delay, sdu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EventQueue;
    use crate::pdcp::LegPath;

    #[test]
    fn strongest_cell_wins() {
        assert_eq!(cell_select(0, &[(0, -100.0), (1, -103.0)]).unwrap(), 0);
        assert_eq!(cell_select(0, &[(0, -104.0), (1, -103.0)]).unwrap(), 1);
        assert_eq!(cell_select(0, &[(5, -90.0)]).unwrap(), 5);
    }

    #[test]
    fn tie_goes_to_lower_id() {
        assert_eq!(cell_select(0, &[(3, -100.0), (1, -100.0), (2, -100.0)]).unwrap(), 1);
    }

    #[test]
    fn empty_candidates_rejected() {
        assert!(matches!(cell_select(4, &[]), Err(SimError::NoCandidateCells { ue: 4 })));
    }

    #[test]
    fn a3_entry_condition() {
        assert!(evaluate_a3(-110.0, -115.0, 10.0));
        assert!(!evaluate_a3(-110.0, -121.0, 10.0));
        assert!(evaluate_a3(-110.0, -110.0, 10.0));
        assert!(evaluate_a3(-110.0, -120.0, 10.0));
    }

    #[test]
    fn sn_binds_once_and_never_to_mn() {
        let mut b = McBinding::new(0, 0);
        assert!(!b.bind_sn(0, SimTime::ZERO));
        assert!(b.bind_sn(1, SimTime::from_millis(200)));
        assert!(!b.bind_sn(2, SimTime::from_millis(400)));
        assert_eq!((b.sn, b.established_at), (Some(1), Some(SimTime::from_millis(200))));
    }

    fn sdu(sn: u64) -> PdcpSdu {
        PdcpSdu {
            sn,
            flow: 0,
            size_bytes: 32,
            created_at: SimTime::ZERO,
            path: LegPath::Sn,
        }
    }

    #[test]
    fn xn_adds_link_delay() {
        let xn = XnLink { delay: SimTime::from_millis(2), endpoints: (0, 1) };
        let (t, _) = xn_forward(sdu(0), &xn, SimTime::from_millis(1000));
        assert_eq!(t, SimTime::from_millis(1002));
        let instant = XnLink { delay: SimTime::ZERO, ..xn };
        assert_eq!(xn_forward(sdu(0), &instant, SimTime::from_millis(5)).0, SimTime::from_millis(5));
    }

    #[test]
    fn xn_is_fifo() {
        let xn = XnLink { delay: SimTime::from_millis(2), endpoints: (0, 1) };
        let mut q = EventQueue::new();
        for (i, now) in [(0u64, 10u64), (1, 10), (2, 11)] {
            let (t, s) = xn_forward(sdu(i), &xn, SimTime::from_millis(now));
            q.schedule(t, s.sn).unwrap();
        }
        let mut order = Vec::new();
        while let Some((_, _, sn)) = q.pop_until(SimTime::MAX) {
            order.push(sn);
        }
        assert_eq!(order, vec![0, 1, 2]);
    }
}
