//! `ampdu-sim`: runs duplication experiments and emits CSV / JSON tables.

mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use ampdu_sim_core::engine::{best_over_strategies, markov_oracle, sweep_k, SimConfig};
use ampdu_sim_core::frame::{analytic_throughput, FrameGeometry, MacTimingProfile, PhyProfile};
use ampdu_sim_core::{AggregationMode, Strategy};
use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use output::{best_row, emit, run_rows, sweep_rows};
use spec::{ExperimentSpec, Format};

#[derive(Parser)]
#[command(
    name = "ampdu-sim",
    version,
    about = "Blind MPDU duplication in 802.11ac aggregates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment spec; keys left out take the full grid value.
    #[arg(long, global = true, conflicts_with = "full_grid")]
    spec: Option<PathBuf>,
    /// Use the full grid (every MSDU size, rate, PER and method).
    #[arg(long, global = true, visible_alias = "paper-grid")]
    full_grid: bool,
    #[arg(long, global = true, env = "AMPDU_SIM_SEED")]
    seed: Option<u64>,
    /// Transmission attempts per simulation run.
    #[arg(long, global = true)]
    attempts: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Every strategy at every grid point, each K-swept.
    Run,
    /// The best strategy at every grid point.
    Best,
    /// Throughput at every `k` for every strategy and grid point.
    SweepK,
    /// Closed-form throughput of one transmission of X single-copy MPDUs.
    Analytic(AnalyticArgs),
    /// Exact throughput of a small window (W <= 4).
    Oracle(OracleArgs),
}

#[derive(Args)]
struct FrameArgs {
    #[arg(long, default_value = "ampdu")]
    mode: AggregationMode,
    #[arg(long, default_value_t = 1500)]
    msdu_bytes: u32,
    #[arg(long, default_value_t = 1)]
    msdus_per_mpdu: u32,
    #[arg(long, default_value_t = 1299.9)]
    rate: f64,
}

#[derive(Args)]
struct AnalyticArgs {
    /// Distinct MPDUs in the aggregate.
    #[arg(long, default_value_t = 64)]
    x: u32,
    #[command(flatten)]
    frame: FrameArgs,
    /// Per-MPDU success probability.
    #[arg(long, default_value_t = 1.0)]
    psucc: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 1)]
    window: u32,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value = "base")]
    strategy: Strategy,
    #[arg(long)]
    per: f64,
    #[command(flatten)]
    frame: FrameArgs,
}

#[derive(Serialize)]
struct AnalyticRow {
    mode: AggregationMode,
    x: u32,
    msdu_bytes: u32,
    msdus_per_mpdu: u32,
    rate_mbps: f64,
    psucc: f64,
    throughput_mbps: f64,
}

#[derive(Serialize)]
struct OracleRow {
    mode: AggregationMode,
    msdu_bytes: u32,
    msdus_per_mpdu: u32,
    rate_mbps: f64,
    per: f64,
    strategy: Strategy,
    window_w: u32,
    k: u32,
    throughput_mbps: f64,
}

/// Spec file (or the full grid) with command-line overrides applied.
fn resolve_spec(common: &Common) -> anyhow::Result<ExperimentSpec> {
    let mut spec = match &common.spec {
        Some(path) => ExperimentSpec::from_path(path)?,
        None if common.full_grid => ExperimentSpec::default(),
        None => anyhow::bail!("grid commands need --spec <path> or --full-grid"),
    };
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if let Some(attempts) = common.attempts {
        spec.attempts = attempts;
    }
    if let Some(format) = common.format {
        spec.format = format;
    }
    if let Some(out) = &common.out {
        spec.output = Some(out.clone());
    }
    spec.validate()?;
    Ok(spec)
}

fn template(spec: &ExperimentSpec) -> anyhow::Result<SimConfig> {
    let first = spec.points()[0];
    let geom = FrameGeometry::with_mode(first.mode, first.msdu_bytes, first.msdus_per_mpdu)?;
    let warmup = ampdu_sim_core::engine::DEFAULT_WARMUP;
    Ok(
        SimConfig::new(geom, first.rate_mbps, first.per, Strategy::BASE)?
            .with_window(spec.window_w, spec.window_w)
            .with_run_length(spec.attempts, warmup)
            .with_seed(spec.seed),
    )
}

fn cmd_grid(command: &Command, spec: &ExperimentSpec) -> anyhow::Result<()> {
    let base = template(spec)?;
    let points = spec.points();
    let out = spec.output.as_deref();
    let (mut run, mut best, mut sweep) = (Vec::new(), Vec::new(), Vec::new());
    for (i, point) in points.iter().enumerate() {
        let cfg = point.apply(&base)?;
        match command {
            Command::SweepK => {
                for &s in &spec.strategies {
                    let sw = sweep_k(&cfg.with_strategy(s))?;
                    sweep.extend(sweep_rows(point, s, &sw, spec.attempts, spec.seed));
                }
            }
            _ => {
                let cmp = best_over_strategies(&cfg, &spec.strategies)?;
                run.extend(run_rows(point, &cmp, spec.attempts, spec.seed));
                best.push(best_row(point, &cmp, spec.attempts, spec.seed));
            }
        }
        eprintln!(
            "point {}/{}: {} L={} m={} R={} per={}",
            i + 1,
            points.len(),
            point.mode,
            point.msdu_bytes,
            point.msdus_per_mpdu,
            point.rate_mbps,
            point.per
        );
    }
    match command {
        Command::Run => emit(&run, spec.format, out),
        Command::Best => emit(&best, spec.format, out),
        _ => emit(&sweep, spec.format, out),
    }
}

fn cmd_analytic(a: &AnalyticArgs, common: &Common) -> anyhow::Result<()> {
    let timing = MacTimingProfile::default();
    let geom = FrameGeometry::with_mode(a.frame.mode, a.frame.msdu_bytes, a.frame.msdus_per_mpdu)?;
    let phy = PhyProfile::new(a.frame.rate, &timing)?;
    let thr = analytic_throughput(a.x, a.psucc, &geom, &timing, &phy)?;
    let row = AnalyticRow {
        mode: a.frame.mode,
        x: a.x,
        msdu_bytes: a.frame.msdu_bytes,
        msdus_per_mpdu: a.frame.msdus_per_mpdu,
        rate_mbps: a.frame.rate,
        psucc: a.psucc,
        throughput_mbps: thr,
    };
    emit(
        &[row],
        common.format.unwrap_or_default(),
        common.out.as_deref(),
    )
}

fn cmd_oracle(a: &OracleArgs, common: &Common) -> anyhow::Result<()> {
    let geom = FrameGeometry::with_mode(a.frame.mode, a.frame.msdu_bytes, a.frame.msdus_per_mpdu)?;
    let cfg = SimConfig::new(geom, a.frame.rate, a.per, a.strategy)?.with_window(a.window, a.k);
    let thr = markov_oracle(&cfg)?;
    let row = OracleRow {
        mode: a.frame.mode,
        msdu_bytes: a.frame.msdu_bytes,
        msdus_per_mpdu: a.frame.msdus_per_mpdu,
        rate_mbps: a.frame.rate,
        per: a.per,
        strategy: a.strategy,
        window_w: a.window,
        k: a.k,
        throughput_mbps: thr,
    };
    emit(
        &[row],
        common.format.unwrap_or_default(),
        common.out.as_deref(),
    )
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot size the worker pool")?;
    }
    match &cli.command {
        Command::Analytic(a) => cmd_analytic(a, &cli.common),
        Command::Oracle(a) => cmd_oracle(a, &cli.common),
        grid => cmd_grid(grid, &resolve_spec(&cli.common)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
