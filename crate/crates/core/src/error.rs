use std::path::PathBuf;

use thiserror::Error;

use crate::engine::SimTime;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("event scheduled at {fire_time} s but clock is already at {now} s")]
    EventInPast { fire_time: SimTime, now: SimTime },

    #[error("random stream label must not be empty")]
    EmptyStreamLabel,

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("no channel table row for scenario `{scenario}` at elevation {elevation_deg}°")]
    MissingTableRow { scenario: String, elevation_deg: i32 },

    #[error("channel table line {line}: {msg}")]
    TableParse { line: usize, msg: String },

    #[error("no candidate cells for UE {ue}")]
    NoCandidateCells { ue: usize },

    #[error("invalid value for `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("failed to parse config {path}: {msg}")]
    ConfigParse { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("run with seed {seed} ({mode}) failed: {msg}")]
    RunFailed { seed: u64, mode: String, msg: String },
}

impl SimError {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }
}
