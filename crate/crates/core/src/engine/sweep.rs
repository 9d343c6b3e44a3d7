//! K-sweeps, strategy comparisons and full parameter grids.

use super::{run_sim, EngineError, SimConfig, SimResult};
use crate::channel::ErrorModel;
use crate::frame::{AggregationMode, FrameGeometry, PhyProfile};
use crate::strategy::Strategy;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Throughput gain of `thr` over `base`, in percent.
pub fn improvement_pct(thr: f64, base: f64) -> f64 {
    100.0 * (thr - base) / base
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweep {
    /// `None` when every `k` was infeasible.
    pub best_k: Option<u32>,
    pub best: Option<SimResult>,
    /// One entry per `k = 1..=window_w`, in order.
    pub per_k: Vec<(u32, SimResult)>,
}

impl KSweep {
    pub fn throughput(&self) -> Option<f64> {
        self.best.as_ref().and_then(|r| r.throughput_mbps)
    }

    pub fn ci95(&self) -> Option<f64> {
        self.best.as_ref().map(|r| r.ci95_mbps)
    }
}

/// Runs `k = 1..=window_w` (ignoring `cfg.k`) and keeps the highest
/// throughput; ties go to the smaller `k`. Infeasible `k` are skipped.
pub fn sweep_k(cfg: &SimConfig) -> Result<KSweep, EngineError> {
    let per_k: Vec<(u32, SimResult)> = (1..=cfg.window_w)
        .into_par_iter()
        .map(|k| run_sim(&cfg.with_k(k)).map(|r| (k, r)))
        .collect::<Result<_, _>>()?;

    let mut best: Option<(u32, &SimResult, f64)> = None;
    for (k, r) in &per_k {
        if let Some(thr) = r.throughput_mbps {
            if best.is_none_or(|(_, _, b)| thr > b) {
                best = Some((*k, r, thr));
            }
        }
    }
    Ok(KSweep {
        best_k: best.map(|(k, _, _)| k),
        best: best.map(|(_, r, _)| r.clone()),
        per_k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub best_k: Option<u32>,
    pub throughput_mbps: Option<f64>,
    pub ci95_mbps: Option<f64>,
    pub improvement_over_base_pct: Option<f64>,
    pub infeasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyComparison {
    /// Same order as the strategies passed in.
    pub outcomes: Vec<StrategyOutcome>,
    /// Index into `outcomes` of the highest throughput (earliest on ties).
    pub best_index: usize,
    pub base_index: usize,
}

impl StrategyComparison {
    pub fn best(&self) -> &StrategyOutcome {
        &self.outcomes[self.best_index]
    }

    pub fn base(&self) -> &StrategyOutcome {
        &self.outcomes[self.base_index]
    }

    pub fn improvement_pct(&self) -> Option<f64> {
        self.best().improvement_over_base_pct
    }

    pub fn outcome(&self, strategy: Strategy) -> Option<&StrategyOutcome> {
        self.outcomes.iter().find(|o| o.strategy == strategy)
    }

    /// Best outcome restricted to `subset`.
    pub fn best_among(&self, subset: &[Strategy]) -> Option<&StrategyOutcome> {
        let mut best: Option<&StrategyOutcome> = None;
        for o in self
            .outcomes
            .iter()
            .filter(|o| subset.contains(&o.strategy))
        {
            if let Some(thr) = o.throughput_mbps {
                if best.is_none_or(|b| thr > b.throughput_mbps.unwrap_or(f64::NEG_INFINITY)) {
                    best = Some(o);
                }
            }
        }
        best
    }
}

/// K-sweeps every strategy at the point described by `cfg` and compares each
/// with the K-swept Base. `strategies` must contain Base.
pub fn best_over_strategies(
    cfg: &SimConfig,
    strategies: &[Strategy],
) -> Result<StrategyComparison, EngineError> {
    let base_index = strategies
        .iter()
        .position(Strategy::is_base)
        .ok_or(EngineError::MissingBase)?;
    let sweeps: Vec<KSweep> = strategies
        .par_iter()
        .map(|&s| sweep_k(&cfg.with_strategy(s)))
        .collect::<Result<_, _>>()?;
    let base_thr = sweeps[base_index].throughput();

    let outcomes: Vec<StrategyOutcome> = strategies
        .iter()
        .zip(&sweeps)
        .map(|(&strategy, sw)| {
            let thr = sw.throughput();
            StrategyOutcome {
                strategy,
                best_k: sw.best_k,
                throughput_mbps: thr,
                ci95_mbps: sw.ci95(),
                improvement_over_base_pct: match (thr, base_thr) {
                    (Some(t), Some(b)) if b > 0.0 => Some(improvement_pct(t, b)),
                    _ => None,
                },
                infeasible: thr.is_none(),
            }
        })
        .collect();

    let mut best_index = base_index;
    for (i, o) in outcomes.iter().enumerate() {
        let cur = outcomes[best_index]
            .throughput_mbps
            .unwrap_or(f64::NEG_INFINITY);
        if let Some(thr) = o.throughput_mbps {
            if thr > cur || (thr == cur && i < best_index) {
                best_index = i;
            }
        }
    }
    Ok(StrategyComparison {
        outcomes,
        best_index,
        base_index,
    })
}

/// One point of a parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub mode: AggregationMode,
    pub msdu_bytes: u32,
    pub msdus_per_mpdu: u32,
    pub rate_mbps: f64,
    pub per: f64,
}

impl GridPoint {
    /// `template` with this point's geometry, rate and PER.
    pub fn apply(&self, template: &SimConfig) -> Result<SimConfig, EngineError> {
        let mut cfg = *template;
        cfg.geom = FrameGeometry::with_mode(self.mode, self.msdu_bytes, self.msdus_per_mpdu)?;
        cfg.phy = PhyProfile::new(self.rate_mbps, &cfg.timing)?;
        cfg.model = ErrorModel::new(self.per)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub point: GridPoint,
    pub comparison: StrategyComparison,
}

/// Compares `strategies` at every point. Points run in parallel; results come
/// back in the order of `points`.
pub fn run_grid(
    points: &[GridPoint],
    strategies: &[Strategy],
    template: &SimConfig,
) -> Result<Vec<PointResult>, EngineError> {
    points
        .par_iter()
        .map(|p| {
            let cfg = p.apply(template)?;
            Ok(PointResult {
                point: *p,
                comparison: best_over_strategies(&cfg, strategies)?,
            })
        })
        .collect()
}
