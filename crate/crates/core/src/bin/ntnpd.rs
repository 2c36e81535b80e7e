use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ntnpd_core::batch::run_batch;
use ntnpd_core::config::{load_config, table1_default};
use ntnpd_core::pdcp::DuplicationMode;
use ntnpd_core::sim::RunOptions;
use ntnpd_core::stats::emit_csv;
use ntnpd_core::SimError;

/// Downlink reliability of PDCP duplication over two LEO satellites.
#[derive(Debug, Parser)]
#[command(name = "ntnpd", version)]
struct Cli {
    /// Scenario TOML; the built-in defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Duplication mode: off, blind or harq_timer.
    #[arg(long)]
    pd_mode: Option<DuplicationMode>,
    /// Override the duplication timer (ms).
    #[arg(long)]
    dup_timer_ms: Option<f64>,
    /// Seed range `A..B` (end exclusive) or a single seed.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Run all three modes on the same seeds.
    #[arg(long)]
    compare: bool,
    /// Write the per-run event log.
    #[arg(long)]
    trace: bool,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, SimError> {
    let bad = |msg: &str| SimError::config("seeds", msg);
    match s.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad("start is not an integer"))?;
            let b: u64 = b.trim().parse().map_err(|_| bad("end is not an integer"))?;
            if b <= a {
                return Err(bad("empty range"));
            }
            Ok((a..b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad("not an integer"))?]),
    }
}

fn run(cli: Cli) -> Result<(), SimError> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => table1_default(),
    };
    if let Some(m) = cli.pd_mode {
        cfg.pdcp.pd_mode = m;
    }
    if let Some(t) = cli.dup_timer_ms {
        cfg.pdcp.dup_timer_ms = t;
    }
    cfg.validate()?;
    let seeds = match &cli.seeds {
        Some(s) => parse_seeds(s)?,
        None => (1..=u64::from(cfg.simulation.rng_runs)).collect(),
    };
    let modes = if cli.compare { DuplicationMode::ALL.to_vec() } else { vec![cfg.pdcp.pd_mode] };
    let opts = RunOptions { trace: cli.trace, record_deliveries: false };
    let batch = run_batch(&cfg, &seeds, &modes, opts)?;

    std::fs::create_dir_all(&cli.out).map_err(|e| SimError::io(&cli.out, e))?;
    let written = emit_csv(&batch.report, &cli.out)?;
    if cli.trace {
        for r in &batch.runs {
            let path = cli.out.join(format!("trace_{}_{}.log", r.summary.pd_mode, r.summary.run_seed));
            let mut text = r.trace.as_deref().unwrap_or_default().join("\n");
            text.push('\n');
            std::fs::write(&path, text).map_err(|e| SimError::io(&path, e))?;
        }
    }
    for m in &batch.report.modes {
        println!(
            "{:<10} runs={:<3} mean={:.4}% p5={:.4}% duplicates={:.1}",
            m.pd_mode.as_str(),
            m.runs,
            m.mean_success_pct,
            m.p5_success_pct,
            m.mean_duplicates
        );
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
