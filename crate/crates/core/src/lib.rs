//! Throughput model and Monte-Carlo simulator for a saturated 802.11ac link
//! that blindly sends extra copies of the MPDUs at the head of the ARQ window
//! inside A-MPDU and Two-Level aggregates.
//!
//! * [`frame`]: element sizes, PSDU airtime, standard limits, closed form.
//! * [`channel`]: PER/BER conversion and per-copy loss sampling.
//! * [`window`]: transmission window and Block Ack scoreboard.
//! * [`strategy`]: `base`, `<d>MPDU<c>` and `ALL<c>` duplication policies.
//! * [`engine`]: simulation loop, K-sweeps, strategy comparison and the
//!   exact Markov oracle.

pub mod channel;
pub mod engine;
pub mod frame;
pub mod strategy;
pub mod window;

pub use channel::{ErrorModel, RandomSource};
pub use engine::{EngineError, SimConfig, SimResult};
pub use frame::{AggregationMode, FrameGeometry, MacTimingProfile, PhyProfile, PsduPlan};
pub use strategy::Strategy;
pub use window::WindowState;
