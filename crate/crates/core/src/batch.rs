//! Independent runs over seeds and duplication modes, executed in parallel.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::SimError;
use crate::pdcp::DuplicationMode;
use crate::sim::{run_scenario, RunOptions, RunOutput};
use crate::stats::{aggregate, Report};

#[derive(Debug, Clone)]
pub struct BatchOutput {
    pub report: Report,
    /// One entry per (mode, seed), sorted by mode then seed.
    pub runs: Vec<RunOutput>,
}

fn run_one(cfg: &ScenarioConfig, mode: DuplicationMode, seed: u64, opts: RunOptions) -> Result<RunOutput, SimError> {
    match catch_unwind(AssertUnwindSafe(|| run_scenario(cfg, mode, seed, opts))) {
        Ok(Ok(out)) => Ok(out),
        Ok(Err(e)) => Err(SimError::RunFailed { seed, mode: mode.to_string(), msg: e.to_string() }),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            Err(SimError::RunFailed { seed, mode: mode.to_string(), msg })
        }
    }
}

/// Runs every mode against every seed. Results do not depend on thread count.
pub fn run_batch(
    cfg: &ScenarioConfig,
    seeds: &[u64],
    modes: &[DuplicationMode],
    opts: RunOptions,
) -> Result<BatchOutput, SimError> {
    cfg.validate()?;
    let jobs: Vec<(DuplicationMode, u64)> = modes
        .iter()
        .flat_map(|m| seeds.iter().map(move |s| (*m, *s)))
        .collect();
    let mut runs = jobs
        .par_iter()
        .map(|(m, s)| run_one(cfg, *m, *s, opts))
        .collect::<Result<Vec<_>, _>>()?;
    runs.sort_by_key(|r| (r.summary.pd_mode, r.summary.run_seed));
    let summaries: Vec<_> = runs.iter().map(|r| r.summary.clone()).collect();
    Ok(BatchOutput { report: aggregate(&summaries), runs })
}
