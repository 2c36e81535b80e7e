use ntnpd_core::config::{load_config, table1_default, ReorderMode};
use ntnpd_core::engine::SimTime;
use ntnpd_core::pdcp::DuplicationMode;
use ntnpd_core::sim::{run_scenario, RunOptions, Simulation};
use ntnpd_core::SimError;

fn short() -> ntnpd_core::config::ScenarioConfig {
    let mut cfg = table1_default();
    cfg.simulation.simulation_time_s = 3.0;
    cfg
}

#[test]
fn every_ue_gets_a_secondary_cell_by_default() {
    let out = run_scenario(&short(), DuplicationMode::Blind, 1, RunOptions::default()).unwrap();
    for (i, d) in out.ues.iter().enumerate() {
        let sn = d.sn.unwrap_or_else(|| panic!("ue {i} never bound an SN"));
        assert_ne!(sn, d.mn);
        assert!(d.sn_bound_at.unwrap() >= SimTime::from_millis(200));
    }
}

#[test]
fn copies_wait_for_the_secondary_and_the_xn_hop() {
    let out = run_scenario(&short(), DuplicationMode::Blind, 2, RunOptions::default()).unwrap();
    assert_eq!(out.xn_order_violations, 0);
    for d in &out.ues {
        if let Some(first) = d.first_copy_at {
            assert!(first >= d.sn_bound_at.unwrap());
        }
    }
}

#[test]
fn harq_feedback_never_precedes_propagation() {
    let out = run_scenario(&short(), DuplicationMode::HarqTimer, 4, RunOptions::default()).unwrap();
    assert_eq!(out.feedback_timing_violations, 0);
    assert!(out.max_attempt_seen <= 2);
}

#[test]
fn off_mode_creates_no_copies_and_timer_mode_needs_nacks() {
    let cfg = short();
    let off = run_scenario(&cfg, DuplicationMode::Off, 5, RunOptions::default()).unwrap();
    assert_eq!(off.summary.total_duplicates(), 0);
    let harq = run_scenario(&cfg, DuplicationMode::HarqTimer, 5, RunOptions::default()).unwrap();
    for (c, d) in harq.summary.per_ue.iter().zip(&harq.ues) {
        if d.primary_nacks == 0 {
            assert_eq!(c.duplicates_created, 0);
        }
    }
}

#[test]
fn primary_leg_outcomes_match_across_modes() {
    // Same seed: the MN leg sees the same draws, so duplication can only help.
    let cfg = short();
    let off = run_scenario(&cfg, DuplicationMode::Off, 8, RunOptions::default()).unwrap();
    let blind = run_scenario(&cfg, DuplicationMode::Blind, 8, RunOptions::default()).unwrap();
    for (o, b) in off.summary.per_ue.iter().zip(&blind.summary.per_ue) {
        assert_eq!(o.sent, b.sent);
        assert!(b.delivered >= o.delivered);
    }
}

#[test]
fn in_order_runs_conserve_packets() {
    let mut cfg = short();
    cfg.pdcp.reorder_mode = ReorderMode::InOrder;
    cfg.pdcp.t_reordering_ms = 50.0;
    let opts = RunOptions { record_deliveries: true, ..Default::default() };
    for mode in DuplicationMode::ALL {
        let out = run_scenario(&cfg, mode, 9, opts).unwrap();
        for (c, d) in out.summary.per_ue.iter().zip(&out.ues) {
            assert_eq!(c.delivered + c.lost, c.sent);
            assert!(d.deliveries.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn infinite_window_holds_until_drain() {
    let mut cfg = short();
    cfg.pdcp.reorder_mode = ReorderMode::InOrder;
    cfg.pdcp.t_reordering_ms = f64::INFINITY;
    let out = run_scenario(&cfg, DuplicationMode::Off, 10, RunOptions::default()).unwrap();
    for c in &out.summary.per_ue {
        assert_eq!(c.delivered + c.lost, c.sent);
    }
}

#[test]
fn shipped_config_loads() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/table1_default.toml");
    assert_eq!(load_config(path.as_ref()).unwrap(), table1_default());
}

#[test]
fn bad_scenario_name_is_reported() {
    let mut cfg = short();
    cfg.channel.scenario = "urban".into();
    let err = Simulation::new(&cfg, DuplicationMode::Off, 1, RunOptions::default()).err().unwrap();
    assert!(matches!(err, SimError::Config { .. } | SimError::MissingTableRow { .. }), "{err}");
}
