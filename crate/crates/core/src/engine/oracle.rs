//! Exact steady-state throughput for tiny windows.
//!
//! The window is a Markov chain over which of the `W - 1` non-base slots are
//! already delivered. Each attempt is a renewal interval whose reward is the
//! payload newly delivered, so the long-run throughput is
//! `Σ π(s) reward(s) / Σ π(s) duration(s)`. This path shares no code with the
//! window scoreboard or the simulation loop.

use super::{EngineError, SimConfig};
use crate::channel::mpdu_delivered_prob;
use crate::frame::{airtime_for_copies, validate_plan, PlanEntry, PlanVerdict, PsduPlan};
use nalgebra::{DMatrix, DVector};

pub const MAX_ORACLE_WINDOW: u32 = 4;

struct StateStep {
    duration_us: f64,
    /// `(probability, next_state, newly_delivered)`
    outcomes: Vec<(f64, usize, u32)>,
}

fn step(mask: u32, cfg: &SimConfig) -> Result<StateStep, EngineError> {
    let w = cfg.window_w;
    let free: Vec<u32> = (0..w).filter(|i| mask >> i & 1 == 0).collect();
    let x = (cfg.k as usize).min(free.len());
    let slots = &free[..x];
    let copies: Vec<u32> = (0..x).map(|i| cfg.strategy.copies_at(i)).collect();

    let plan = PsduPlan::new(
        slots
            .iter()
            .zip(&copies)
            .map(|(&slot, &c)| PlanEntry {
                seq: u64::from(slot),
                copies: c,
            })
            .collect(),
    )?;
    if let PlanVerdict::Reject(v) = validate_plan(&plan, &cfg.geom, &cfg.timing, &cfg.phy) {
        return Err(EngineError::Infeasible(v));
    }
    let total: u64 = copies.iter().map(|&c| u64::from(c)).sum();
    let duration_us = cfg.timing.c1() + airtime_for_copies(total, &cfg.geom, &cfg.timing, &cfg.phy);

    let q: Vec<f64> = copies
        .iter()
        .map(|&c| mpdu_delivered_prob(cfg.model.per(), c))
        .collect();
    let mut outcomes = Vec::with_capacity(1 << x);
    for pattern in 0u32..(1 << x) {
        let mut prob = 1.0;
        let mut acked = 0u32;
        for (i, &slot) in slots.iter().enumerate() {
            if pattern >> i & 1 == 1 {
                prob *= q[i];
                acked |= 1 << slot;
            } else {
                prob *= 1.0 - q[i];
            }
        }
        if prob == 0.0 {
            continue;
        }
        let merged = mask | acked;
        let slide = merged.trailing_ones();
        let next = if slide >= w { 0 } else { merged >> slide };
        outcomes.push((prob, (next >> 1) as usize, acked.count_ones()));
    }
    Ok(StateStep {
        duration_us,
        outcomes,
    })
}

/// Exact long-run throughput (Mbps) of `cfg` for `window_w <= 4`.
pub fn markov_oracle(cfg: &SimConfig) -> Result<f64, EngineError> {
    if cfg.window_w > MAX_ORACLE_WINDOW {
        return Err(EngineError::OracleWindowTooLarge(cfg.window_w));
    }
    if cfg.window_w == 0 || cfg.k == 0 || cfg.k > cfg.window_w {
        return Err(EngineError::InvalidConfig(format!(
            "k = {} with window_w = {}",
            cfg.k, cfg.window_w
        )));
    }
    cfg.geom.validate()?;
    let n = 1usize << (cfg.window_w - 1);
    let steps: Vec<StateStep> = (0..n)
        .map(|s| step((s as u32) << 1, cfg))
        .collect::<Result<_, _>>()?;
    if cfg.model.per() == 1.0 {
        return Ok(0.0);
    }

    // π (P - I) = 0 with the last balance equation replaced by Σ π = 1
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (from, st) in steps.iter().enumerate() {
        for &(prob, to, _) in &st.outcomes {
            a[(to, from)] += prob;
        }
        a[(from, from)] -= 1.0;
    }
    for col in 0..n {
        a[(n - 1, col)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| EngineError::InvalidConfig("singular transition system".into()))?;

    let payload = cfg.payload_bits() as f64;
    let (mut reward, mut time) = (0.0, 0.0);
    for (s, st) in steps.iter().enumerate() {
        let expected_new: f64 = st
            .outcomes
            .iter()
            .map(|&(p, _, newly)| p * f64::from(newly))
            .sum();
        reward += pi[s] * expected_new * payload;
        time += pi[s] * st.duration_us;
    }
    Ok(reward / time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{analytic_throughput, FrameGeometry};

    fn cfg(per: f64, strategy: &str, w: u32, k: u32) -> SimConfig {
        SimConfig::new(
            FrameGeometry::ampdu(1500).unwrap(),
            1299.9,
            per,
            strategy.parse().unwrap(),
        )
        .unwrap()
        .with_window(w, k)
    }

    #[test]
    fn single_state_chain() {
        let thr = markov_oracle(&cfg(0.5, "base", 1, 1)).unwrap();
        assert!((thr - 6000.0 / 213.5).abs() < 1e-9);
        assert!((thr - 28.10).abs() < 0.005);
    }

    #[test]
    fn single_slot_duplication_closed_form() {
        // W = K = 1: renewal with reward (1 - p^c) L bits per C1 + airtime(c)
        for c in 2u32..=5 {
            let c_cfg = cfg(0.4, &format!("1MPDU{c}"), 1, 1);
            let air = airtime_for_copies(u64::from(c), &c_cfg.geom, &c_cfg.timing, &c_cfg.phy);
            let want = (1.0 - 0.4f64.powi(c as i32)) * 12_000.0 / (201.5 + air);
            assert!((markov_oracle(&c_cfg).unwrap() - want).abs() < 1e-9);
        }
    }

    #[test]
    fn error_free_matches_closed_form() {
        for w in 1..=4 {
            for k in 1..=w {
                let c = cfg(0.0, "base", w, k);
                let want = analytic_throughput(k, 1.0, &c.geom, &c.timing, &c.phy).unwrap();
                assert!(
                    (markov_oracle(&c).unwrap() - want).abs() < 1e-9 * want,
                    "w={w} k={k}"
                );
            }
        }
    }

    #[test]
    fn total_loss_is_zero() {
        assert_eq!(markov_oracle(&cfg(1.0, "ALL2", 4, 4)).unwrap(), 0.0);
    }

    #[test]
    fn window_guard() {
        assert!(matches!(
            markov_oracle(&cfg(0.3, "base", 5, 5)),
            Err(EngineError::OracleWindowTooLarge(5))
        ));
    }

    /// Two-slot window solved by hand: from "slot 1 pending" the chain moves
    /// to "slot 1 delivered" iff the base fails and slot 1 succeeds, and
    /// returns from there iff the lone base succeeds.
    fn two_slot_closed_form(q0: f64, q1: f64, t_both: f64, t_base: f64) -> f64 {
        let (a, b) = ((1.0 - q0) * q1, q0);
        let (pi0, pi1) = (b / (a + b), a / (a + b));
        12_000.0 * (pi0 * (q0 + q1) + pi1 * q0) / (pi0 * (201.5 + t_both) + pi1 * (201.5 + t_base))
    }

    #[test]
    fn two_slot_window_against_hand_solution() {
        let base = markov_oracle(&cfg(0.5, "base", 2, 2)).unwrap();
        let dup = markov_oracle(&cfg(0.5, "1MPDU2", 2, 2)).unwrap();
        // airtimes at 1299.9 Mbps: 1, 2, 3 elements take 12, 20, 32 us
        let want_base = two_slot_closed_form(0.5, 0.5, 20.0, 12.0);
        let want_dup = two_slot_closed_form(0.75, 0.5, 32.0, 20.0);
        assert!((base - want_base).abs() < 1e-9, "{base} vs {want_base}");
        assert!((dup - want_dup).abs() < 1e-9, "{dup} vs {want_dup}");
        assert!((base - 45.697).abs() < 1e-3);
        assert!((dup - 61.017).abs() < 1e-3);
    }
}
