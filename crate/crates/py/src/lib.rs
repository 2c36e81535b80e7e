//! Python bindings for the ntnpd simulator.
//!
//! ```text
//! import ntnpd
//! cfg = ntnpd.Config.default()
//! cfg.simulation_time_s = 2.0
//! run = ntnpd.run(cfg, "harq_timer", seed=1)
//! print(run.mean_success, run.total_duplicates)
//! ```

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ntnpd_core::batch;
use ntnpd_core::channel;
use ntnpd_core::config::{load_config, table1_default, ScenarioConfig};
use ntnpd_core::engine::SimTime;
use ntnpd_core::geometry::{self, GeoPosition};
use ntnpd_core::pdcp::{DuplicationMode, ReorderWindow, RxOutcome, TimerAction};
use ntnpd_core::sim::{self, RunOptions};
use ntnpd_core::stats;
use ntnpd_core::SimError;

fn to_py(e: SimError) -> PyErr {
    match e {
        SimError::Io { .. } => PyOSError::new_err(e.to_string()),
        SimError::RunFailed { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_mode(s: &str) -> PyResult<DuplicationMode> {
    s.parse()
        .map_err(|_| PyValueError::new_err(format!("unknown pd_mode {s:?}; expected off, blind or harq_timer")))
}

/// Scenario configuration. Starts from the built-in defaults.
#[pyclass(name = "Config", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new() -> Self {
        Self { inner: table1_default() }
    }

    #[staticmethod]
    fn default() -> Self {
        Self::new()
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: load_config(&path).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let inner = ScenarioConfig::from_toml_str(text, "<python>".as_ref()).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py)
    }

    #[getter]
    fn simulation_time_s(&self) -> f64 {
        self.inner.simulation.simulation_time_s
    }

    #[setter]
    fn set_simulation_time_s(&mut self, v: f64) {
        self.inner.simulation.simulation_time_s = v;
    }

    #[getter]
    fn ue_count(&self) -> usize {
        self.inner.beams.ue_count
    }

    #[setter]
    fn set_ue_count(&mut self, v: usize) {
        self.inner.beams.ue_count = v;
    }

    #[getter]
    fn pd_mode(&self) -> &'static str {
        self.inner.pdcp.pd_mode.as_str()
    }

    #[setter]
    fn set_pd_mode(&mut self, v: &str) -> PyResult<()> {
        self.inner.pdcp.pd_mode = parse_mode(v)?;
        Ok(())
    }

    #[getter]
    fn dup_timer_ms(&self) -> f64 {
        self.inner.pdcp.dup_timer_ms
    }

    #[setter]
    fn set_dup_timer_ms(&mut self, v: f64) {
        self.inner.pdcp.dup_timer_ms = v;
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(simulation_time_s={}, ue_count={}, pd_mode={:?})",
            self.inner.simulation.simulation_time_s,
            self.inner.beams.ue_count,
            self.inner.pdcp.pd_mode.as_str()
        )
    }
}

#[pyclass(get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct UeResult {
    sent: u64,
    delivered: u64,
    lost: u64,
    duplicates_created: u64,
    duplicates_discarded: u64,
    success_rate: Option<f64>,
}

/// Outcome of one run.
#[pyclass(get_all, frozen)]
struct RunResult {
    seed: u64,
    pd_mode: &'static str,
    per_ue: Vec<UeResult>,
    mean_success: Option<f64>,
    total_duplicates: u64,
    trace_digest: u64,
    trace: Option<Vec<String>>,
}

impl From<sim::RunOutput> for RunResult {
    fn from(out: sim::RunOutput) -> Self {
        let s = &out.summary;
        Self {
            seed: s.run_seed,
            pd_mode: s.pd_mode.as_str(),
            per_ue: s
                .per_ue
                .iter()
                .map(|c| UeResult {
                    sent: c.sent,
                    delivered: c.delivered,
                    lost: c.lost,
                    duplicates_created: c.duplicates_created,
                    duplicates_discarded: c.duplicates_discarded,
                    success_rate: c.success_rate(),
                })
                .collect(),
            mean_success: s.mean_success(),
            total_duplicates: s.total_duplicates(),
            trace_digest: out.trace_digest,
            trace: out.trace,
        }
    }
}

#[pyclass(get_all, frozen)]
struct ModeResult {
    pd_mode: &'static str,
    runs: usize,
    mean_success_pct: f64,
    p5_success_pct: f64,
    mean_duplicates: f64,
    cdf: Vec<(f64, f64)>,
}

impl From<&stats::ModeReport> for ModeResult {
    fn from(m: &stats::ModeReport) -> Self {
        Self {
            pd_mode: m.pd_mode.as_str(),
            runs: m.runs,
            mean_success_pct: m.mean_success_pct,
            p5_success_pct: m.p5_success_pct,
            mean_duplicates: m.mean_duplicates,
            cdf: m.cdf.clone(),
        }
    }
}

/// Runs one seed in one duplication mode.
#[pyfunction]
#[pyo3(signature = (config, pd_mode, seed, trace=false))]
fn run(py: Python<'_>, config: &PyConfig, pd_mode: &str, seed: u64, trace: bool) -> PyResult<RunResult> {
    let mode = parse_mode(pd_mode)?;
    let opts = RunOptions { trace, record_deliveries: false };
    let cfg = config.inner.clone();
    let out = py
        .detach(|| sim::run_scenario(&cfg, mode, seed, opts))
        .map_err(to_py)?;
    Ok(out.into())
}

/// Runs every mode on every seed in parallel and returns one report per mode.
/// Writes the CSV outputs when `out_dir` is given.
#[pyfunction]
#[pyo3(signature = (config, seeds, modes=None, out_dir=None))]
fn run_batch(
    py: Python<'_>,
    config: &PyConfig,
    seeds: Vec<u64>,
    modes: Option<Vec<String>>,
    out_dir: Option<PathBuf>,
) -> PyResult<Vec<ModeResult>> {
    let modes = match modes {
        Some(ms) => ms.iter().map(|m| parse_mode(m)).collect::<PyResult<Vec<_>>>()?,
        None => DuplicationMode::ALL.to_vec(),
    };
    let cfg = config.inner.clone();
    let out = py
        .detach(|| batch::run_batch(&cfg, &seeds, &modes, RunOptions::default()))
        .map_err(to_py)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir).map_err(|e| to_py(SimError::io(&dir, e)))?;
        stats::emit_csv(&out.report, &dir).map_err(to_py)?;
    }
    Ok(out.report.modes.iter().map(ModeResult::from).collect())
}

/// Free-space path loss in dB.
#[pyfunction]
fn fspl(distance_m: f64, carrier_hz: f64) -> PyResult<f64> {
    channel::fspl(distance_m, carrier_hz).map_err(to_py)
}

/// Slant range in metres between a satellite and a ground point.
#[pyfunction]
#[pyo3(signature = (sat_lat, sat_lon, sat_alt_m, ue_lat, ue_lon, ue_alt_m=0.0))]
fn slant_range(sat_lat: f64, sat_lon: f64, sat_alt_m: f64, ue_lat: f64, ue_lon: f64, ue_alt_m: f64) -> f64 {
    geometry::slant_range(&GeoPosition::new(sat_lat, sat_lon, sat_alt_m), &GeoPosition::new(ue_lat, ue_lon, ue_alt_m))
}

/// Elevation angle in degrees of the satellite seen from the ground point.
#[pyfunction]
#[pyo3(signature = (sat_lat, sat_lon, sat_alt_m, ue_lat, ue_lon, ue_alt_m=0.0))]
fn elevation_angle(sat_lat: f64, sat_lon: f64, sat_alt_m: f64, ue_lat: f64, ue_lon: f64, ue_alt_m: f64) -> f64 {
    geometry::elevation_angle(&GeoPosition::new(sat_lat, sat_lon, sat_alt_m), &GeoPosition::new(ue_lat, ue_lon, ue_alt_m))
}

fn timer_name(t: TimerAction) -> &'static str {
    match t {
        TimerAction::None => "none",
        TimerAction::Start => "start",
        TimerAction::Stop => "stop",
        TimerAction::Restart => "restart",
    }
}

fn outcome(o: RxOutcome) -> (Vec<u64>, &'static str) {
    (o.delivered, timer_name(o.timer))
}

/// PDCP receive-side buffer. `t_reordering_s` of 0 delivers out of order;
/// `float("inf")` waits forever for gaps.
#[pyclass(name = "ReorderBuffer")]
struct PyReorderBuffer {
    inner: ntnpd_core::pdcp::ReorderBuffer,
}

#[pymethods]
impl PyReorderBuffer {
    #[new]
    fn new(t_reordering_s: f64) -> PyResult<Self> {
        let window = ReorderWindow::from_secs(t_reordering_s).map_err(to_py)?;
        Ok(Self { inner: ntnpd_core::pdcp::ReorderBuffer::new(window) })
    }

    /// Returns `(delivered_sns, timer_action)`.
    fn rx_ingest(&mut self, sn: u64) -> (Vec<u64>, &'static str) {
        outcome(self.inner.rx_ingest(sn, SimTime::ZERO))
    }

    fn on_reorder_expiry(&mut self) -> (Vec<u64>, &'static str) {
        outcome(self.inner.on_reorder_expiry(SimTime::ZERO))
    }

    #[getter]
    fn timer_running(&self) -> bool {
        self.inner.timer_running()
    }

    #[getter]
    fn held(&self) -> Vec<u64> {
        self.inner.held().collect()
    }

    #[getter]
    fn duplicates_discarded(&self) -> u64 {
        self.inner.duplicates_discarded
    }
}

#[pymodule]
pub fn ntnpd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<RunResult>()?;
    m.add_class::<UeResult>()?;
    m.add_class::<ModeResult>()?;
    m.add_class::<PyReorderBuffer>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_batch, m)?)?;
    m.add_function(wrap_pyfunction!(fspl, m)?)?;
    m.add_function(wrap_pyfunction!(slant_range, m)?)?;
    m.add_function(wrap_pyfunction!(elevation_angle, m)?)?;
    m.add("PD_MODES", DuplicationMode::ALL.map(|d| d.as_str()).to_vec())?;
    Ok(())
}
