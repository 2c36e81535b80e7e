//! Scenario configuration. Every field defaults to the reference two-satellite
//! S-band scenario; files only need to list overrides. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelTable, LinkBudgetParams};
use crate::engine::SimTime;
use crate::error::SimError;
use crate::geometry::GeoPosition;
use crate::pdcp::{DuplicationMode, DuplicationPolicy, ReorderWindow};
use crate::phy_mac::BlerCurve;

pub const TABLE1_DEFAULT_TOML: &str = include_str!("../../../configs/table1_default.toml");

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub simulation: SimulationSection,
    pub satellites: SatelliteSection,
    pub beams: BeamSection,
    pub channel: ChannelSection,
    pub link_budget: LinkBudgetSection,
    pub phy: PhySection,
    pub traffic: TrafficSection,
    pub mc: McSection,
    pub pdcp: PdcpSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub simulation_time_s: f64,
    pub warmup_s: f64,
    pub rng_runs: u32,
    /// Extra time after the end of traffic to let in-flight SDUs settle.
    pub drain_s: f64,
    pub mobility_tick_ms: f64,
    pub slot_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatelliteSection {
    pub payload: String,
    pub orbit_altitude_m: f64,
    /// Orbital speed at altitude.
    pub ground_speed_mps: f64,
    /// `[lat_deg, lon_deg]` per satellite; the first is cell 0.
    pub start_positions: Vec<[f64; 2]>,
    pub heading_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamSection {
    pub target_lat_deg: f64,
    pub target_lon_deg: f64,
    pub ue_count: usize,
    pub ue_placement_radius_m: f64,
    pub ue_antenna: String,
    /// Channel-correlation speed only; UEs do not move.
    pub ue_doppler_kmh: f64,
    pub wraparound_rings: u8,
    /// Off-axis gain of each wraparound ring's beams toward the center beam, relative to boresight.
    pub wraparound_ring_gain_db: Vec<f64>,
    pub frf: u8,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub scenario: String,
    /// Optional override of the bundled rural S-band table.
    pub table_path: Option<PathBuf>,
    pub los_cube_side_m: f64,
    pub pl_gas_db: f64,
    pub pl_scint_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudgetSection {
    pub eirp_dbm: f64,
    pub g_rx_dbi: f64,
    pub noise_figure_db: f64,
    pub temperature_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhySection {
    pub scheduler: String,
    pub slot_resources: u32,
    pub resources_per_tb: u32,
    pub harq_max_retx: u8,
    pub harq_processing_slots: u32,
    pub modcod_index: usize,
    pub modcods: Vec<BlerCurve>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CbrPhase {
    Zero,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSection {
    pub cbr_packet_bytes: u32,
    pub cbr_interval_ms: f64,
    pub cbr_phase: CbrPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    /// Relative A3 offset in dB.
    pub sn_offset_db: f64,
    pub xn_delay_ms: f64,
    pub measurement_period_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReorderMode {
    OutOfOrder,
    InOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdcpSection {
    pub pd_mode: DuplicationMode,
    pub dup_timer_ms: f64,
    pub reorder_mode: ReorderMode,
    /// 0, (0, 3000] or `inf`.
    pub t_reordering_ms: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            simulation_time_s: 10.0,
            warmup_s: 0.5,
            rng_runs: 80,
            drain_s: 1.0,
            mobility_tick_ms: 10.0,
            slot_ms: 1.0,
        }
    }
}

impl Default for SatelliteSection {
    fn default() -> Self {
        Self {
            payload: "transparent".into(),
            orbit_altitude_m: 600_000.0,
            ground_speed_mps: 7_560.0,
            start_positions: vec![[62.38, 20.0], [61.38, 20.0]],
            heading_deg: 270.0,
        }
    }
}

impl Default for BeamSection {
    fn default() -> Self {
        Self {
            target_lat_deg: 62.25,
            target_lon_deg: 25.74,
            ue_count: 10,
            ue_placement_radius_m: 30_000.0,
            ue_antenna: "omnidirectional".into(),
            ue_doppler_kmh: 3.0,
            wraparound_rings: 2,
            wraparound_ring_gain_db: vec![-20.0, -30.0],
            frf: 3,
            bandwidth_hz: 10e6,
            carrier_hz: 2e9,
        }
    }
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            scenario: "rural".into(),
            table_path: None,
            los_cube_side_m: 3_500.0,
            pl_gas_db: 0.0,
            pl_scint_db: 0.0,
        }
    }
}

impl Default for LinkBudgetSection {
    // EIRP density 34 dBW/MHz over 10 MHz; handheld UE with 0 dBi and 7 dB NF.
    fn default() -> Self {
        Self {
            eirp_dbm: 74.0,
            g_rx_dbi: 0.0,
            noise_figure_db: 7.0,
            temperature_k: 290.0,
        }
    }
}

impl Default for PhySection {
    fn default() -> Self {
        Self {
            scheduler: "round_robin".into(),
            slot_resources: 52,
            resources_per_tb: 4,
            harq_max_retx: 1,
            harq_processing_slots: 4,
            modcod_index: 0,
            modcods: vec![
                BlerCurve { midpoint_db: -6.0, slope_per_db: 1.5 },
                BlerCurve { midpoint_db: -3.0, slope_per_db: 1.5 },
                BlerCurve { midpoint_db: 0.0, slope_per_db: 1.5 },
                BlerCurve { midpoint_db: 3.0, slope_per_db: 1.5 },
            ],
        }
    }
}

impl Default for TrafficSection {
    fn default() -> Self {
        Self {
            cbr_packet_bytes: 32,
            cbr_interval_ms: 20.0,
            cbr_phase: CbrPhase::Zero,
        }
    }
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            sn_offset_db: 10.0,
            xn_delay_ms: 2.0,
            measurement_period_ms: 200.0,
        }
    }
}

impl Default for PdcpSection {
    fn default() -> Self {
        Self {
            pd_mode: DuplicationMode::HarqTimer,
            dup_timer_ms: 50.0,
            reorder_mode: ReorderMode::OutOfOrder,
            t_reordering_ms: 0.0,
        }
    }
}

fn ms(v: f64) -> SimTime {
    SimTime::from_secs_f64(v * 1e-3)
}

fn positive(key: &str, v: f64) -> Result<(), SimError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(key, format!("must be a positive finite number, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), SimError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(key, format!("must be a non-negative finite number, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, SimError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| SimError::ConfigParse {
            path: origin.to_path_buf(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let s = &self.simulation;
        positive("simulation.simulation_time_s", s.simulation_time_s)?;
        non_negative("simulation.warmup_s", s.warmup_s)?;
        if s.warmup_s >= s.simulation_time_s {
            return Err(SimError::config(
                "simulation.warmup_s",
                format!("must be below simulation_time_s ({})", s.simulation_time_s),
            ));
        }
        if s.rng_runs == 0 {
            return Err(SimError::config("simulation.rng_runs", "must be at least 1"));
        }
        non_negative("simulation.drain_s", s.drain_s)?;
        positive("simulation.mobility_tick_ms", s.mobility_tick_ms)?;
        positive("simulation.slot_ms", s.slot_ms)?;

        let sat = &self.satellites;
        if sat.payload != "transparent" {
            return Err(SimError::config("satellites.payload", "only `transparent` is supported"));
        }
        positive("satellites.orbit_altitude_m", sat.orbit_altitude_m)?;
        positive("satellites.ground_speed_mps", sat.ground_speed_mps)?;
        if sat.start_positions.len() != 2 {
            return Err(SimError::config(
                "satellites.start_positions",
                format!("expected two satellites, got {}", sat.start_positions.len()),
            ));
        }
        for [lat, lon] in &sat.start_positions {
            if !(-90.0..=90.0).contains(lat) || !(-180.0..180.0).contains(lon) {
                return Err(SimError::config(
                    "satellites.start_positions",
                    format!("({lat}, {lon}) is not a valid latitude/longitude"),
                ));
            }
        }

        let b = &self.beams;
        if !(-90.0..=90.0).contains(&b.target_lat_deg) {
            return Err(SimError::config("beams.target_lat_deg", "outside [-90, 90]"));
        }
        if !(-180.0..180.0).contains(&b.target_lon_deg) {
            return Err(SimError::config("beams.target_lon_deg", "outside [-180, 180)"));
        }
        if b.ue_count == 0 {
            return Err(SimError::config("beams.ue_count", "must be at least 1"));
        }
        non_negative("beams.ue_placement_radius_m", b.ue_placement_radius_m)?;
        if b.ue_antenna != "omnidirectional" {
            return Err(SimError::config("beams.ue_antenna", "only `omnidirectional` is supported"));
        }
        non_negative("beams.ue_doppler_kmh", b.ue_doppler_kmh)?;
        if b.frf != 1 && b.frf != 3 {
            return Err(SimError::config("beams.frf", format!("must be 1 or 3, got {}", b.frf)));
        }
        if b.wraparound_ring_gain_db.len() != usize::from(b.wraparound_rings) {
            return Err(SimError::config(
                "beams.wraparound_ring_gain_db",
                format!("needs one entry per ring ({})", b.wraparound_rings),
            ));
        }
        positive("beams.bandwidth_hz", b.bandwidth_hz)?;
        positive("beams.carrier_hz", b.carrier_hz)?;

        let c = &self.channel;
        positive("channel.los_cube_side_m", c.los_cube_side_m)?;
        non_negative("channel.pl_gas_db", c.pl_gas_db)?;
        non_negative("channel.pl_scint_db", c.pl_scint_db)?;

        positive("link_budget.temperature_k", self.link_budget.temperature_k)?;

        let p = &self.phy;
        if p.scheduler != "round_robin" {
            return Err(SimError::config("phy.scheduler", "only `round_robin` is supported"));
        }
        if p.slot_resources == 0 || p.resources_per_tb == 0 || p.resources_per_tb > p.slot_resources {
            return Err(SimError::config(
                "phy.resources_per_tb",
                "must be in 1..=slot_resources",
            ));
        }
        if p.harq_max_retx != 1 {
            return Err(SimError::config("phy.harq_max_retx", "only one retransmission is modelled"));
        }
        if p.modcod_index >= p.modcods.len() {
            return Err(SimError::config(
                "phy.modcod_index",
                format!("no MODCOD {} among {}", p.modcod_index, p.modcods.len()),
            ));
        }
        if p.modcods.iter().any(|m| !(m.slope_per_db > 0.0) || !m.midpoint_db.is_finite()) {
            return Err(SimError::config("phy.modcods", "slopes must be positive, midpoints finite"));
        }

        let t = &self.traffic;
        if t.cbr_packet_bytes == 0 {
            return Err(SimError::config("traffic.cbr_packet_bytes", "must be positive"));
        }
        positive("traffic.cbr_interval_ms", t.cbr_interval_ms)?;

        let m = &self.mc;
        if !m.sn_offset_db.is_finite() {
            return Err(SimError::config("mc.sn_offset_db", "must be finite"));
        }
        non_negative("mc.xn_delay_ms", m.xn_delay_ms)?;
        positive("mc.measurement_period_ms", m.measurement_period_ms)?;

        positive("pdcp.dup_timer_ms", self.pdcp.dup_timer_ms)?;
        self.reorder_window()?;
        Ok(())
    }

    pub fn duplication_policy(&self) -> DuplicationPolicy {
        DuplicationPolicy::new(self.pdcp.pd_mode, ms(self.pdcp.dup_timer_ms))
    }

    pub fn reorder_window(&self) -> Result<ReorderWindow, SimError> {
        match self.pdcp.reorder_mode {
            ReorderMode::OutOfOrder => Ok(ReorderWindow::OutOfOrder),
            ReorderMode::InOrder => {
                ReorderWindow::from_secs(self.pdcp.t_reordering_ms * 1e-3).map_err(|e| match e {
                    SimError::Config { msg, .. } => SimError::config("pdcp.t_reordering_ms", msg),
                    other => other,
                })
            }
        }
    }

    pub fn channel_table(&self) -> Result<ChannelTable, SimError> {
        let table = match &self.channel.table_path {
            Some(p) => ChannelTable::load(p)?,
            None => ChannelTable::rural_sband(),
        };
        if !table.has_scenario(&self.channel.scenario) {
            return Err(SimError::config(
                "channel.scenario",
                format!("no rows for `{}` in channel table", self.channel.scenario),
            ));
        }
        Ok(table)
    }

    pub fn link_budget(&self) -> LinkBudgetParams {
        LinkBudgetParams {
            eirp_dbm: self.link_budget.eirp_dbm,
            g_rx_dbi: self.link_budget.g_rx_dbi,
            noise_figure_db: self.link_budget.noise_figure_db,
            bandwidth_hz: self.beams.bandwidth_hz,
            temperature_k: self.link_budget.temperature_k,
        }
    }

    pub fn bler_curve(&self) -> BlerCurve {
        self.phy.modcods[self.phy.modcod_index]
    }

    pub fn target(&self) -> GeoPosition {
        GeoPosition::new(self.beams.target_lat_deg, self.beams.target_lon_deg, 0.0)
    }

    pub fn simulation_time(&self) -> SimTime {
        SimTime::from_secs_f64(self.simulation.simulation_time_s)
    }

    pub fn warmup(&self) -> SimTime {
        SimTime::from_secs_f64(self.simulation.warmup_s)
    }

    pub fn slot(&self) -> SimTime {
        ms(self.simulation.slot_ms)
    }

    pub fn mobility_tick(&self) -> SimTime {
        ms(self.simulation.mobility_tick_ms)
    }

    pub fn cbr_interval(&self) -> SimTime {
        ms(self.traffic.cbr_interval_ms)
    }

    pub fn xn_delay(&self) -> SimTime {
        ms(self.mc.xn_delay_ms)
    }

    pub fn measurement_period(&self) -> SimTime {
        ms(self.mc.measurement_period_ms)
    }

    pub fn harq_processing(&self) -> SimTime {
        SimTime::from_nanos(self.slot().as_nanos() * u64::from(self.phy.harq_processing_slots))
    }

    /// Drain window, extended by the reordering timer so held SDUs get flushed.
    pub fn drain(&self) -> SimTime {
        let base = SimTime::from_secs_f64(self.simulation.drain_s);
        match self.reorder_window() {
            Ok(ReorderWindow::Timed(d)) => base + d,
            _ => base,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, SimError> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    ScenarioConfig::from_toml_str(&text, path)
}

pub fn table1_default() -> ScenarioConfig {
    ScenarioConfig::from_toml_str(TABLE1_DEFAULT_TOML, Path::new("table1_default.toml"))
        .expect("shipped default config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig, SimError> {
        ScenarioConfig::from_toml_str(text, Path::new("test.toml"))
    }

    #[test]
    fn shipped_file_matches_builtin_defaults() {
        let cfg = table1_default();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.pdcp.dup_timer_ms, 50.0);
        assert_eq!(cfg.mc.xn_delay_ms, 2.0);
        assert_eq!(cfg.simulation.simulation_time_s, 10.0);
        assert_eq!(cfg.simulation.warmup_s, 0.5);
        assert_eq!(cfg.simulation.rng_runs, 80);
        assert_eq!(cfg.beams.ue_count, 10);
        assert_eq!(cfg.beams.frf, 3);
        assert_eq!(cfg.traffic.cbr_packet_bytes, 32);
        assert_eq!(cfg.satellites.start_positions, vec![[62.38, 20.0], [61.38, 20.0]]);
    }

    #[test]
    fn empty_file_takes_defaults() {
        assert_eq!(parse("").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn frf_two_rejected_naming_key() {
        let err = parse("[beams]\nfrf = 2\n").unwrap_err();
        assert!(err.to_string().contains("beams.frf"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse("[pdcp]\ndup_timer = 50\n").unwrap_err();
        assert!(err.to_string().contains("dup_timer"), "{err}");
        assert!(parse("[nonsense]\n").is_err());
    }

    #[test]
    fn warmup_must_precede_end() {
        let err = parse("[simulation]\nwarmup_s = 10.0\n").unwrap_err();
        assert!(err.to_string().contains("simulation.warmup_s"));
    }

    #[test]
    fn reordering_bounds_enforced() {
        let err = parse("[pdcp]\nreorder_mode = \"in_order\"\nt_reordering_ms = 5000.0\n").unwrap_err();
        assert!(err.to_string().contains("pdcp.t_reordering_ms"), "{err}");
        let cfg = parse("[pdcp]\nreorder_mode = \"in_order\"\nt_reordering_ms = inf\n").unwrap();
        assert_eq!(cfg.reorder_window().unwrap(), ReorderWindow::Infinite);
        let cfg = parse("[pdcp]\nreorder_mode = \"in_order\"\nt_reordering_ms = 0.0\n").unwrap();
        assert_eq!(cfg.reorder_window().unwrap(), ReorderWindow::OutOfOrder);
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_config(Path::new("/nonexistent/cfg.toml")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/cfg.toml"));
    }

    #[test]
    fn round_trip() {
        let mut cfg = ScenarioConfig::default();
        cfg.pdcp.pd_mode = DuplicationMode::Blind;
        cfg.pdcp.reorder_mode = ReorderMode::InOrder;
        cfg.pdcp.t_reordering_ms = 120.0;
        cfg.traffic.cbr_phase = CbrPhase::Random;
        let text = cfg.to_toml_string();
        assert_eq!(parse(&text).unwrap(), cfg);
    }
}
