//! Experiment description: the axes of a sweep plus run settings.

use std::fmt;
use std::path::{Path, PathBuf};

use ampdu_sim_core::engine::{GridPoint, DEFAULT_ATTEMPTS, DEFAULT_WARMUP, DEFAULT_WINDOW};
use ampdu_sim_core::frame::{FrameGeometry, GRID_MSDU_BYTES, GRID_RATES_MBPS, MAX_MSDUS_PER_MPDU};
use ampdu_sim_core::strategy::standard_methods;
use ampdu_sim_core::window::MAX_WINDOW;
use ampdu_sim_core::{AggregationMode, Strategy};
use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Missing keys take the full grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub mode: AggregationMode,
    pub msdu_bytes: Vec<u32>,
    pub msdus_per_mpdu: Vec<u32>,
    pub rates_mbps: Vec<f64>,
    pub pers: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub window_w: u32,
    pub attempts: u64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

/// PER 0.05 to 0.50 in steps of 0.05.
pub fn grid_pers() -> Vec<f64> {
    (1..=10).map(|i| f64::from(i) * 5.0 / 100.0).collect()
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            mode: AggregationMode::Ampdu,
            msdu_bytes: GRID_MSDU_BYTES.to_vec(),
            msdus_per_mpdu: vec![1],
            rates_mbps: GRID_RATES_MBPS.to_vec(),
            pers: grid_pers(),
            strategies: standard_methods(),
            window_w: DEFAULT_WINDOW,
            attempts: DEFAULT_ATTEMPTS,
            seed: 0,
            output: None,
            format: Format::Csv,
        }
    }
}

fn non_empty<T>(key: &str, v: &[T]) -> anyhow::Result<()> {
    if v.is_empty() {
        bail!("\"{key}\" must list at least one value");
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read spec {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("invalid spec {}", path.display()))
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        non_empty("msdu_bytes", &self.msdu_bytes)?;
        non_empty("msdus_per_mpdu", &self.msdus_per_mpdu)?;
        non_empty("rates_mbps", &self.rates_mbps)?;
        non_empty("pers", &self.pers)?;
        non_empty("strategies", &self.strategies)?;
        for &m in &self.msdus_per_mpdu {
            if m == 0 || m > MAX_MSDUS_PER_MPDU {
                bail!("\"msdus_per_mpdu\": {m} is outside 1..={MAX_MSDUS_PER_MPDU}");
            }
            if self.mode == AggregationMode::Ampdu && m != 1 {
                bail!("\"msdus_per_mpdu\": {m} needs \"mode\": \"two_level\" (ampdu carries one MSDU per MPDU)");
            }
        }
        for &l in &self.msdu_bytes {
            for &m in &self.msdus_per_mpdu {
                FrameGeometry::with_mode(self.mode, l, m)
                    .map_err(|e| anyhow::anyhow!("\"msdu_bytes\": {l}: {e}"))?;
            }
        }
        for &r in &self.rates_mbps {
            if !(r.is_finite() && r > 0.0) {
                bail!("\"rates_mbps\": {r} must be a positive rate");
            }
        }
        for &p in &self.pers {
            if !(0.0..=1.0).contains(&p) {
                bail!("\"pers\": {p} is outside [0, 1]");
            }
        }
        if !self.strategies.iter().any(Strategy::is_base) {
            bail!("\"strategies\" must include base, the reference for improvements");
        }
        if self.window_w == 0 || self.window_w > MAX_WINDOW {
            bail!(
                "\"window_w\": {} is outside 1..={MAX_WINDOW}",
                self.window_w
            );
        }
        let min_attempts = DEFAULT_WARMUP + 20;
        if self.attempts < min_attempts {
            bail!(
                "\"attempts\": {} is below {min_attempts} (warm-up plus one attempt per batch)",
                self.attempts
            );
        }
        Ok(())
    }

    /// Cross product of the axes, ordered by mode, MSDU size, MSDUs per
    /// MPDU, rate and PER.
    pub fn points(&self) -> Vec<GridPoint> {
        let sorted = |v: &[u32]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        };
        let sorted_f = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let (ls, ms) = (sorted(&self.msdu_bytes), sorted(&self.msdus_per_mpdu));
        let (rates, pers) = (sorted_f(&self.rates_mbps), sorted_f(&self.pers));
        let mut out = Vec::with_capacity(ls.len() * ms.len() * rates.len() * pers.len());
        for &msdu_bytes in &ls {
            for &msdus_per_mpdu in &ms {
                for &rate_mbps in &rates {
                    for &per in &pers {
                        out.push(GridPoint {
                            mode: self.mode,
                            msdu_bytes,
                            msdus_per_mpdu,
                            rate_mbps,
                            per,
                        });
                    }
                }
            }
        }
        out
    }
}
