//! Scaling argument for why duplication pays off less as the PSDU grows.
//!
//! With a fixed overhead `C1`, Base delivering `B` bits in `T` and a
//! duplicating method delivering `B_s` bits in `T + T_s`, multiplying the
//! PSDU by `α` gives the throughput ratio
//! `[α B_s / (C1 + α (T + T_s))] / [α B / (C1 + α T)]`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioInputs {
    pub c1_us: f64,
    pub t_us: f64,
    pub t_s_us: f64,
    pub b_bits: f64,
    pub b_s_bits: f64,
    pub alpha: f64,
}

/// Throughput of the duplicating method divided by Base throughput.
pub fn ratio_eq_thr(inputs: &RatioInputs) -> f64 {
    let RatioInputs {
        c1_us,
        t_us,
        t_s_us,
        b_bits,
        b_s_bits,
        alpha,
    } = *inputs;
    let dup = alpha * b_s_bits / (c1_us + alpha * (t_us + t_s_us));
    let base = alpha * b_bits / (c1_us + alpha * t_us);
    dup / base
}
