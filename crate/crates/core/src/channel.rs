//! Per-MPDU loss model.
//!
//! Bit errors are i.i.d. with probability BER, so a frame of `B` bits fails
//! with probability `1 - (1 - BER)^B`. Each transmitted MPDU copy is an
//! independent Bernoulli trial with that failure probability.

use crate::frame::PsduPlan;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("a PER of 1 has no finite BER")]
    CertainLoss,
    #[error("frame length must be at least one bit")]
    EmptyFrame,
}

fn check_prob(p: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ChannelError::BadProbability(p))
    }
}

/// Failure probability of each MPDU copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    per: f64,
}

impl ErrorModel {
    pub fn new(per: f64) -> Result<Self, ChannelError> {
        check_prob(per)?;
        Ok(ErrorModel { per })
    }

    pub fn per(&self) -> f64 {
        self.per
    }
}

/// `1 - (1 - ber)^frame_bits`.
pub fn per_from_ber(ber: f64, frame_bits: u64) -> Result<f64, ChannelError> {
    check_prob(ber)?;
    if frame_bits == 0 {
        return Err(ChannelError::EmptyFrame);
    }
    if ber == 1.0 {
        return Ok(1.0);
    }
    // log-domain keeps tiny BERs exact
    Ok(-(frame_bits as f64 * (-ber).ln_1p()).exp_m1())
}

/// Inverse of [`per_from_ber`].
pub fn ber_from_per(per: f64, frame_bits: u64) -> Result<f64, ChannelError> {
    check_prob(per)?;
    if frame_bits == 0 {
        return Err(ChannelError::EmptyFrame);
    }
    if per == 1.0 {
        return Err(ChannelError::CertainLoss);
    }
    Ok(-((-per).ln_1p() / frame_bits as f64).exp_m1())
}

/// Probability that at least one of `copies` copies gets through.
pub fn mpdu_delivered_prob(per: f64, copies: u32) -> f64 {
    1.0 - per.powi(copies as i32)
}

/// Seeded generator owned by a single simulation run.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::for_run(seed, 0)
    }

    /// Independent stream `run_index` under `master_seed`.
    pub fn for_run(master_seed: u64, run_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(run_index);
        RandomSource { rng }
    }

    /// 32 uniform bits.
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
}

/// `Some(delivered)` when the outcome needs no draws.
fn certain(model: &ErrorModel) -> Option<bool> {
    match model.per {
        0.0 => Some(true),
        1.0 => Some(false),
        _ => None,
    }
}

/// Draws `copies` trials for every entry in plan order and appends the
/// sequence numbers with at least one surviving copy to `delivered`. A PER of
/// exactly 0 or 1 consumes no randomness.
pub fn sample_plan_outcome_into(
    plan: &PsduPlan,
    model: &ErrorModel,
    rng: &mut RandomSource,
    delivered: &mut Vec<u64>,
) {
    if let Some(all) = certain(model) {
        if all {
            delivered.extend(plan.entries().iter().map(|e| e.seq));
        }
        return;
    }
    // a copy survives iff u >= per * 2^32
    let threshold = (model.per * (1u64 << 32) as f64) as u64;
    for entry in plan.entries() {
        let mut ok = false;
        for _ in 0..entry.copies {
            ok |= u64::from(rng.next_u32()) >= threshold;
        }
        if ok {
            delivered.push(entry.seq);
        }
    }
}

/// Bernoulli trials on a bitmap of MPDU slots: the slot at position `i` (in
/// ascending bit order) is sent `copies_at(i)` times. Consumes the generator
/// exactly as [`sample_plan_outcome_into`] does for the equivalent plan.
pub fn sample_slots(
    slots: u64,
    copies_at: impl Fn(usize) -> u32,
    model: &ErrorModel,
    rng: &mut RandomSource,
) -> u64 {
    if let Some(all) = certain(model) {
        return if all { slots } else { 0 };
    }
    let threshold = (model.per * (1u64 << 32) as f64) as u64;
    let mut pending = slots;
    let mut delivered = 0u64;
    let mut i = 0;
    while pending != 0 {
        let low = pending & pending.wrapping_neg();
        pending ^= low;
        let mut ok = false;
        for _ in 0..copies_at(i) {
            ok |= u64::from(rng.next_u32()) >= threshold;
        }
        if ok {
            delivered |= low;
        }
        i += 1;
    }
    delivered
}

/// Sequence numbers of `plan` that reach the receiver, ascending.
pub fn sample_plan_outcome(
    plan: &PsduPlan,
    model: &ErrorModel,
    rng: &mut RandomSource,
) -> Vec<u64> {
    let mut delivered = Vec::with_capacity(plan.distinct_count());
    sample_plan_outcome_into(plan, model, rng, &mut delivered);
    delivered
}
