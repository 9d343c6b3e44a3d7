//! Transmission loop, steady-state measurement, sweeps and the exact
//! small-window oracle.

mod oracle;
mod ratio;
mod sim;
mod sweep;

pub use oracle::{markov_oracle, MAX_ORACLE_WINDOW};
pub use ratio::{ratio_eq_thr, RatioInputs};
pub use sim::{
    run_sim, SimConfig, SimResult, CI_BATCHES, DEFAULT_ATTEMPTS, DEFAULT_WARMUP, DEFAULT_WINDOW,
};
pub use sweep::{
    best_over_strategies, improvement_pct, run_grid, sweep_k, GridPoint, KSweep, PointResult,
    StrategyComparison, StrategyOutcome,
};

use crate::channel::ChannelError;
use crate::frame::{FrameError, PlanViolation};
use crate::window::WindowError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("the exact oracle supports windows up to {MAX_ORACLE_WINDOW}, got {0}")]
    OracleWindowTooLarge(u32),
    #[error("configuration breaks a PSDU limit: {0:?}")]
    Infeasible(Vec<PlanViolation>),
    #[error("strategy set must include base")]
    MissingBase,
}
