use super::EngineError;
use crate::channel::{sample_slots, ErrorModel, RandomSource};
use crate::frame::{
    psdu_airtime_us, validate_plan, FrameGeometry, MacTimingProfile, PhyProfile, PlanVerdict,
    PlanViolation,
};
use crate::strategy::{build_plan, Strategy};
use crate::window::{WindowState, MAX_WINDOW};
use serde::{Deserialize, Serialize};

pub const DEFAULT_WINDOW: u32 = 64;
pub const DEFAULT_ATTEMPTS: u64 = 200_000;
pub const DEFAULT_WARMUP: u64 = 1_000;
/// Batches used for the batch-means confidence interval.
pub const CI_BATCHES: u64 = 20;
/// Two-sided 97.5% Student-t quantile with `CI_BATCHES - 1` degrees of freedom.
const T_QUANTILE_19: f64 = 2.093_024_054_408_263;

/// One saturated link, one duplication strategy, one aggregation limit `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub geom: FrameGeometry,
    pub timing: MacTimingProfile,
    pub phy: PhyProfile,
    pub model: ErrorModel,
    pub strategy: Strategy,
    pub window_w: u32,
    pub k: u32,
    pub attempts: u64,
    pub warmup_attempts: u64,
    pub seed: u64,
}

impl SimConfig {
    /// Default timing, W = 64, K = 64 and the default run length.
    pub fn new(
        geom: FrameGeometry,
        rate_mbps: f64,
        per: f64,
        strategy: Strategy,
    ) -> Result<Self, EngineError> {
        let timing = MacTimingProfile::default();
        Ok(SimConfig {
            geom,
            timing,
            phy: PhyProfile::new(rate_mbps, &timing)?,
            model: ErrorModel::new(per)?,
            strategy,
            window_w: DEFAULT_WINDOW,
            k: DEFAULT_WINDOW,
            attempts: DEFAULT_ATTEMPTS,
            warmup_attempts: DEFAULT_WARMUP,
            seed: 0,
        })
    }

    pub fn with_window(mut self, window_w: u32, k: u32) -> Self {
        self.window_w = window_w;
        self.k = k;
        self
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = k;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_run_length(mut self, attempts: u64, warmup_attempts: u64) -> Self {
        self.attempts = attempts;
        self.warmup_attempts = warmup_attempts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.geom.validate()?;
        self.timing.validate()?;
        if self.window_w == 0 || self.window_w > MAX_WINDOW {
            return Err(EngineError::InvalidConfig(format!(
                "window_w = {} is outside 1..={MAX_WINDOW}",
                self.window_w
            )));
        }
        if self.k == 0 || self.k > self.window_w {
            return Err(EngineError::InvalidConfig(format!(
                "k = {} is outside 1..={}",
                self.k, self.window_w
            )));
        }
        if self.attempts < self.warmup_attempts + CI_BATCHES {
            return Err(EngineError::InvalidConfig(format!(
                "attempts ({}) must exceed warmup_attempts ({}) by at least {CI_BATCHES}",
                self.attempts, self.warmup_attempts
            )));
        }
        Ok(())
    }

    /// Payload bits of one delivered MPDU.
    pub fn payload_bits(&self) -> u64 {
        self.geom.payload_bits()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// `None` when some transmission broke a standard limit.
    pub throughput_mbps: Option<f64>,
    pub ci95_mbps: f64,
    pub delivered_mpdus: u64,
    pub total_time_us: f64,
    pub infeasible: bool,
    pub violations: Vec<PlanViolation>,
}

impl SimResult {
    fn infeasible(violations: Vec<PlanViolation>) -> Self {
        SimResult {
            throughput_mbps: None,
            ci95_mbps: 0.0,
            delivered_mpdus: 0,
            total_time_us: 0.0,
            infeasible: true,
            violations,
        }
    }
}

/// 95% half-width of the mean rate over batches of `(bits, µs)`.
fn batch_means(batches: &[(f64, f64)]) -> f64 {
    let n = batches.len() as f64;
    let rates: Vec<f64> = batches.iter().map(|&(bits, t)| bits / t).collect();
    // shifted by the first batch so identical batches give exactly zero
    let shift = rates[0];
    let mean = rates.iter().map(|r| r - shift).sum::<f64>() / n;
    let var = rates
        .iter()
        .map(|r| (r - shift - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    T_QUANTILE_19 * (var / n).sqrt()
}

/// Attempt duration for an `x`-MPDU transmission set, or the limits it breaks.
fn tabulate(
    cfg: &SimConfig,
    x: usize,
    c1: f64,
) -> Result<Result<f64, Vec<PlanViolation>>, EngineError> {
    let seqs: Vec<u64> = (0..x as u64).collect();
    let plan = build_plan(&seqs, cfg.strategy)?;
    Ok(
        match validate_plan(&plan, &cfg.geom, &cfg.timing, &cfg.phy) {
            PlanVerdict::Accept => {
                Ok(c1 + psdu_airtime_us(&plan, &cfg.geom, &cfg.timing, &cfg.phy)?)
            }
            PlanVerdict::Reject(v) => Err(v),
        },
    )
}

/// Runs `attempts` transmission attempts and measures steady-state goodput.
///
/// The random stream is `(seed, k)`: every strategy evaluated at the same
/// `k` under the same seed sees the same draws, which sharpens comparisons.
pub fn run_sim(cfg: &SimConfig) -> Result<SimResult, EngineError> {
    cfg.validate()?;
    let mut window = WindowState::new(cfg.window_w)?;
    let mut rng = RandomSource::for_run(cfg.seed, u64::from(cfg.k));
    let c1 = cfg.timing.c1();
    let payload = cfg.payload_bits() as f64;

    let measured = cfg.attempts - cfg.warmup_attempts;
    let batch_len = measured / CI_BATCHES;
    // leftover attempts go to the last batch
    let mut batches = vec![(0.0f64, 0.0f64); CI_BATCHES as usize];
    let mut delivered_total = 0u64;
    let mut time_total = 0.0f64;

    // Plan size and limits depend only on how many MPDUs are selected, so
    // verdict and airtime are tabulated once per X.
    let mut per_x: Vec<Option<Result<f64, Vec<PlanViolation>>>> = vec![None; cfg.k as usize + 1];
    for attempt in 0..cfg.attempts {
        let offsets = window.xmin_offsets(cfg.k)?;
        let x = offsets.count_ones() as usize;
        let slot = &mut per_x[x];
        if slot.is_none() {
            *slot = Some(tabulate(cfg, x, c1)?);
        }
        let duration = match slot {
            Some(Ok(d)) => *d,
            Some(Err(v)) => return Ok(SimResult::infeasible(v.clone())),
            None => unreachable!(),
        };
        let acked = sample_slots(offsets, |i| cfg.strategy.copies_at(i), &cfg.model, &mut rng);
        let newly = window.apply_back_offsets(acked)?;

        if attempt >= cfg.warmup_attempts {
            let idx = ((attempt - cfg.warmup_attempts) / batch_len).min(CI_BATCHES - 1) as usize;
            batches[idx].0 += f64::from(newly) * payload;
            batches[idx].1 += duration;
            delivered_total += u64::from(newly);
            time_total += duration;
        }
    }

    Ok(SimResult {
        throughput_mbps: Some(delivered_total as f64 * payload / time_total),
        ci95_mbps: batch_means(&batches),
        delivered_mpdus: delivered_total,
        total_time_us: time_total,
        infeasible: false,
        violations: Vec::new(),
    })
}
