//! Reliability metrics, cross-run aggregation and CSV output.
//!
//! CDFs pool every UE's success rate from every run; scalars are averaged
//! over runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::SimError;
use crate::pdcp::DuplicationMode;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct UeCounters {
    pub sent: u64,
    pub delivered: u64,
    pub duplicates_created: u64,
    pub duplicates_discarded: u64,
    pub lost: u64,
}

impl UeCounters {
    pub fn success_rate(&self) -> Option<f64> {
        success_rate(self)
    }
}

/// Percentage of post-warmup SDUs delivered at least once; `None` if none were sent.
pub fn success_rate(c: &UeCounters) -> Option<f64> {
    (c.sent > 0).then(|| 100.0 * c.delivered as f64 / c.sent as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run_seed: u64,
    pub pd_mode: DuplicationMode,
    pub per_ue: Vec<UeCounters>,
}

impl RunSummary {
    pub fn total_duplicates(&self) -> u64 {
        self.per_ue.iter().map(|c| c.duplicates_created).sum()
    }

    pub fn success_rates(&self) -> Vec<f64> {
        self.per_ue.iter().filter_map(UeCounters::success_rate).collect()
    }

    pub fn mean_success(&self) -> Option<f64> {
        let rates = self.success_rates();
        (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub pd_mode: DuplicationMode,
    pub runs: usize,
    pub mean_success_pct: f64,
    pub p5_success_pct: f64,
    pub mean_duplicates: f64,
    /// `(value, cumulative probability)` over the pooled per-UE rates.
    pub cdf: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub modes: Vec<ModeReport>,
    pub runs: Vec<RunSummary>,
}

impl Report {
    pub fn mode(&self, mode: DuplicationMode) -> Option<&ModeReport> {
        self.modes.iter().find(|m| m.pd_mode == mode)
    }
}

/// Nearest-rank percentile (`p` in percent) of an ascending slice.
pub fn percentile_nearest_rank(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, (i + 1) as f64 / n))
        .collect()
}

pub fn aggregate(runs: &[RunSummary]) -> Report {
    let mut by_mode: BTreeMap<DuplicationMode, Vec<&RunSummary>> = BTreeMap::new();
    for r in runs {
        by_mode.entry(r.pd_mode).or_default().push(r);
    }
    let modes = by_mode
        .into_iter()
        .map(|(pd_mode, rs)| {
            let pooled: Vec<f64> = rs.iter().flat_map(|r| r.success_rates()).collect();
            let cdf = empirical_cdf(&pooled);
            let sorted: Vec<f64> = cdf.iter().map(|(v, _)| *v).collect();
            let run_means: Vec<f64> = rs.iter().filter_map(|r| r.mean_success()).collect();
            let mean_success_pct = if run_means.is_empty() {
                f64::NAN
            } else {
                run_means.iter().sum::<f64>() / run_means.len() as f64
            };
            let mean_duplicates =
                rs.iter().map(|r| r.total_duplicates() as f64).sum::<f64>() / rs.len() as f64;
            ModeReport {
                pd_mode,
                runs: rs.len(),
                mean_success_pct,
                p5_success_pct: percentile_nearest_rank(&sorted, 5.0).unwrap_or(f64::NAN),
                mean_duplicates,
                cdf,
            }
        })
        .collect();
    let mut runs = runs.to_vec();
    runs.sort_by_key(|r| (r.pd_mode, r.run_seed));
    Report { modes, runs }
}

fn f4(v: f64) -> String {
    format!("{v:.4}")
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), SimError> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(err) => SimError::io(path, err),
        other => SimError::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

/// Writes `summary.csv`, `cdf_success.csv` and `per_run.csv` into `out_dir`.
pub fn emit_csv(report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    fs::create_dir_all(out_dir).map_err(|e| SimError::io(out_dir, e))?;

    let summary = out_dir.join("summary.csv");
    write_csv(
        &summary,
        &["pd_mode", "mean_success_pct", "p5_success_pct", "pdcp_duplicates"],
        report
            .modes
            .iter()
            .map(|m| {
                vec![
                    m.pd_mode.to_string(),
                    f4(m.mean_success_pct),
                    f4(m.p5_success_pct),
                    f4(m.mean_duplicates),
                ]
            })
            .collect(),
    )?;

    let cdf = out_dir.join("cdf_success.csv");
    write_csv(
        &cdf,
        &["pd_mode", "value", "cum_prob"],
        report
            .modes
            .iter()
            .flat_map(|m| {
                m.cdf
                    .iter()
                    .map(move |(v, p)| vec![m.pd_mode.to_string(), f4(*v), f4(*p)])
            })
            .collect(),
    )?;

    let per_run = out_dir.join("per_run.csv");
    write_csv(
        &per_run,
        &[
            "pd_mode",
            "seed",
            "ue",
            "sent",
            "delivered",
            "lost",
            "duplicates_created",
            "duplicates_discarded",
            "success_pct",
        ],
        report
            .runs
            .iter()
            .flat_map(|r| {
                r.per_ue.iter().enumerate().map(move |(ue, c)| {
                    vec![
                        r.pd_mode.to_string(),
                        r.run_seed.to_string(),
                        ue.to_string(),
                        c.sent.to_string(),
                        c.delivered.to_string(),
                        c.lost.to_string(),
                        c.duplicates_created.to_string(),
                        c.duplicates_discarded.to_string(),
                        c.success_rate().map(f4).unwrap_or_default(),
                    ]
                })
            })
            .collect(),
    )?;

    Ok(vec![summary, cdf, per_run])
}
