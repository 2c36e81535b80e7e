//! Elevation-indexed channel parameter table.
//!
//! Line format: `scenario, elevation_deg, p_los, sigma_sf_los, sigma_sf_nlos, cl_db`.
//! Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::SimError;

pub const RURAL_SBAND: &str = include_str!("../../data/channel_rural_sband.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRow {
    pub p_los: f64,
    pub sigma_sf_los: f64,
    pub sigma_sf_nlos: f64,
    pub cl_db: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelTable {
    rows: BTreeMap<(String, i32), ChannelRow>,
}

impl ChannelTable {
    pub fn rural_sband() -> Self {
        Self::parse(RURAL_SBAND).expect("bundled channel table is valid")
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = BTreeMap::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| SimError::TableParse {
                line: e.position().map_or(0, |p| p.line() as usize),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let bad = |msg: String| SimError::TableParse { line, msg };
            if rec.len() != 6 {
                return Err(bad(format!("expected 6 fields, found {}", rec.len())));
            }
            let num = |i: usize| -> Result<f64, SimError> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|e| bad(format!("field {}: {e}", i + 1)))
            };
            let elevation = num(1)?;
            if elevation.fract() != 0.0 || elevation.abs() > 90.0 {
                return Err(bad(format!("elevation {elevation} is not an integer degree")));
            }
            let row = ChannelRow {
                p_los: num(2)?,
                sigma_sf_los: num(3)?,
                sigma_sf_nlos: num(4)?,
                cl_db: num(5)?,
            };
            if !(0.0..=1.0).contains(&row.p_los) {
                return Err(bad(format!("p_los {} outside [0, 1]", row.p_los)));
            }
            if row.sigma_sf_los < 0.0 || row.sigma_sf_nlos < 0.0 || row.cl_db < 0.0 {
                return Err(bad("sigma and clutter loss must be non-negative".into()));
            }
            rows.insert((rec[0].to_string(), elevation as i32), row);
        }
        Ok(Self { rows })
    }

    /// Row nearest to `elevation_deg` on the 10° grid.
    pub fn lookup(&self, scenario: &str, elevation_deg: f64) -> Result<&ChannelRow, SimError> {
        let key = ((elevation_deg / 10.0).round() * 10.0) as i32;
        self.rows
            .get(&(scenario.to_string(), key))
            .ok_or_else(|| SimError::MissingTableRow {
                scenario: scenario.to_string(),
                elevation_deg: key,
            })
    }

    pub fn has_scenario(&self, scenario: &str) -> bool {
        self.rows.keys().any(|(s, _)| s == scenario)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
