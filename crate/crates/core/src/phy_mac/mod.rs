//! Link abstraction: SINR per transmission, logistic SINR→BLER mapping,
//! round-robin scheduling, HARQ and the wraparound interference layout.

mod harq;
mod scheduler;

pub use harq::{
    feedback_due, on_feedback, transmit, Feedback, FeedbackActions, HarqOutcome, HarqProcess,
    TbLink, TransportBlock, TxTiming,
};
pub use scheduler::{schedule_round_robin, Allocation, QueueDemand, RoundRobin};

use serde::{Deserialize, Serialize};

use crate::channel::{received_power, LinkBudgetParams, LinkState};

/// Subcarrier spacing used for the per-resource-element RSRP offset.
pub const SUBCARRIER_SPACING_HZ: f64 = 15e3;

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Power sum of interferers given in dBm. An empty set is -inf dBm.
pub fn sum_dbm(powers_dbm: &[f64]) -> f64 {
    mw_to_dbm(powers_dbm.iter().map(|p| dbm_to_mw(*p)).sum())
}

/// C / (I + N) in dB.
pub fn sinr(c_dbm: f64, interferers_dbm: &[f64], noise_dbm: f64) -> f64 {
    let i: f64 = interferers_dbm.iter().map(|p| dbm_to_mw(*p)).sum();
    c_dbm - mw_to_dbm(i + dbm_to_mw(noise_dbm))
}

/// Logistic BLER curve: `1 / (1 + exp(slope * (sinr - midpoint)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlerCurve {
    pub midpoint_db: f64,
    pub slope_per_db: f64,
}

impl BlerCurve {
    pub fn bler(&self, sinr_db: f64) -> f64 {
        bler(sinr_db, self)
    }
}

pub fn bler(sinr_db: f64, curve: &BlerCurve) -> f64 {
    if sinr_db == f64::INFINITY {
        return 0.0;
    }
    if sinr_db == f64::NEG_INFINITY {
        return 1.0;
    }
    let x = curve.slope_per_db * (sinr_db - curve.midpoint_db);
    // exp overflows to inf for large x, which still yields 0
    (1.0 / (1.0 + x.exp())).clamp(0.0, 1.0)
}

/// Reference-signal power: received power spread over the subcarriers of
/// the carrier. The offset depends only on bandwidth, so it is common to
/// all cells.
pub fn rsrp(link: &LinkState, params: &LinkBudgetParams, pl_gas: f64, pl_scint: f64) -> f64 {
    let pl = link.breakdown(pl_gas, pl_scint).pl_total;
    received_power(params, pl) + rsrp_offset_db(params.bandwidth_hz)
}

pub fn rsrp_offset_db(bandwidth_hz: f64) -> f64 {
    -10.0 * (bandwidth_hz / SUBCARRIER_SPACING_HZ).log10()
}

/// One beam of the wraparound rings, on a hexagonal grid in axial coordinates
/// with the center beam at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WrapBeam {
    pub ring: u8,
    pub q: i32,
    pub r: i32,
    /// Sub-band index under the reuse pattern.
    pub color: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WraparoundLayout {
    pub beams: Vec<WrapBeam>,
    pub frf: u8,
}

impl WraparoundLayout {
    /// `rings` hexagonal rings around the center beam, coloured for reuse
    /// factor 1 or 3.
    pub fn hexagonal(rings: u8, frf: u8) -> Self {
        const DIRS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
        let mut beams = Vec::new();
        for ring in 1..=i32::from(rings) {
            // walk the ring starting from (-ring, ring) direction-by-direction
            let (mut q, mut r) = (-ring, ring);
            for (dq, dr) in DIRS {
                for _ in 0..ring {
                    beams.push(WrapBeam {
                        ring: ring as u8,
                        q,
                        r,
                        color: Self::color_of(q, r, frf),
                    });
                    q += dq;
                    r += dr;
                }
            }
        }
        Self { beams, frf }
    }

    fn color_of(q: i32, r: i32, frf: u8) -> u8 {
        if frf <= 1 {
            0
        } else {
            (q - r).rem_euclid(i32::from(frf)) as u8
        }
    }

    /// Beams sharing the center beam's sub-band.
    pub fn co_channel(&self) -> impl Iterator<Item = &WrapBeam> {
        let center = Self::color_of(0, 0, self.frf);
        self.beams.iter().filter(move |b| b.color == center)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GeoPosition, LosAnchor};
    use proptest::prelude::*;

    #[test]
    fn sinr_without_interference_is_snr() {
        let s = sinr(-80.0, &[], -97.0);
        assert!((s - 17.0).abs() < 1e-9);
    }

    #[test]
    fn equal_interferers_add_three_db() {
        let one = sum_dbm(&[-100.0]);
        let two = sum_dbm(&[-100.0, -100.0]);
        assert!((two - one - 10.0 * 2f64.log10()).abs() < 1e-9);
        assert!((two - one - 3.01).abs() < 0.001);
    }

    #[test]
    fn frf3_second_ring_has_six_co_channel_beams() {
        let l = WraparoundLayout::hexagonal(2, 3);
        assert_eq!(l.beams.len(), 18);
        let co: Vec<_> = l.co_channel().collect();
        assert_eq!(co.len(), 6);
        assert!(co.iter().all(|b| b.ring == 2));
        let frf1 = WraparoundLayout::hexagonal(2, 1);
        assert_eq!(frf1.co_channel().count(), 18);
    }

    #[test]
    fn hex_colouring_separates_neighbours() {
        let l = WraparoundLayout::hexagonal(2, 3);
        let mut all = l.beams.clone();
        all.push(WrapBeam { ring: 0, q: 0, r: 0, color: 0 });
        for a in &all {
            for b in &all {
                let (dq, dr) = (a.q - b.q, a.r - b.r);
                let adjacent = matches!((dq, dr), (1, 0) | (-1, 0) | (0, 1) | (0, -1) | (1, -1) | (-1, 1));
                if adjacent {
                    assert_ne!(a.color, b.color);
                }
            }
        }
    }

    #[test]
    fn bler_asymptotes_and_midpoint() {
        let c = BlerCurve { midpoint_db: -4.0, slope_per_db: 1.5 };
        assert_eq!(bler(-4.0, &c), 0.5);
        assert_eq!(bler(f64::INFINITY, &c), 0.0);
        assert_eq!(bler(f64::NEG_INFINITY, &c), 1.0);
        assert!(bler(1e6, &c) < 1e-12);
        assert!(bler(-1e6, &c) > 1.0 - 1e-12);
    }

    fn link_at(slant_m: f64, sf: f64) -> LinkState {
        LinkState {
            los: true,
            sf_db: sf,
            cl_db: 0.0,
            elevation_deg: 60.0,
            slant_m,
            carrier_hz: 2e9,
            anchor: LosAnchor::new(&GeoPosition::new(0.0, 0.0, 600e3), 3500.0),
        }
    }

    fn budget() -> LinkBudgetParams {
        LinkBudgetParams {
            eirp_dbm: 74.0,
            g_rx_dbi: 0.0,
            noise_figure_db: 7.0,
            bandwidth_hz: 10e6,
            temperature_k: 290.0,
        }
    }

    #[test]
    fn rsrp_difference_equals_power_difference() {
        let (a, b) = (link_at(700e3, 0.0), link_at(720e3, 1.5));
        let p = budget();
        let ra = rsrp(&a, &p, 0.0, 0.0);
        let rb = rsrp(&b, &p, 0.0, 0.0);
        let ca = received_power(&p, a.breakdown(0.0, 0.0).pl_total);
        let cb = received_power(&p, b.breakdown(0.0, 0.0).pl_total);
        assert!(ra > rb);
        assert!(((ra - rb) - (ca - cb)).abs() < 1e-9);
        assert_eq!(rsrp(&a, &p, 0.0, 0.0), rsrp(&a.clone(), &p, 0.0, 0.0));
    }

    proptest! {
        #[test]
        fn bler_monotone_in_sinr(mid in -10.0f64..10.0, slope in 0.1f64..5.0,
                                 s in -40.0f64..40.0, ds in 0.0f64..10.0) {
            let c = BlerCurve { midpoint_db: mid, slope_per_db: slope };
            let (lo, hi) = (bler(s, &c), bler(s + ds, &c));
            prop_assert!((0.0..=1.0).contains(&lo));
            prop_assert!(hi <= lo);
        }

        #[test]
        fn interference_never_raises_sinr(c in -120.0f64..-60.0, i in -150.0f64..-60.0) {
            prop_assert!(sinr(c, &[i], -97.0) < sinr(c, &[], -97.0));
        }
    }
}
