//! ARQ transmission window with a Block Ack scoreboard.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Scoreboard capacity; the compressed BAck bitmap is 64 bits.
pub const MAX_WINDOW: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowError {
    #[error("window width {0} is outside 1..={MAX_WINDOW}")]
    BadWidth(u32),
    #[error("K = {k} is outside 1..={width}")]
    BadK { k: u32, width: u32 },
    #[error("sequence number {seq} is outside the window [{base}, {end}]")]
    OutOfWindow { seq: u64, base: u64, end: u64 },
    #[error("the window base {0} cannot be marked delivered")]
    BaseDelivered(u64),
}

/// Transmission window over an unbounded MPDU sequence.
///
/// Bit `i` of the scoreboard is set when `base_seq + i` has been delivered.
/// Bit 0 is always clear: the window slides as soon as the base arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowState {
    base_seq: u64,
    width: u32,
    scoreboard: u64,
}

impl WindowState {
    pub fn new(width: u32) -> Result<Self, WindowError> {
        Self::with_delivered(0, width, &[])
    }

    /// A window at `base_seq` where `delivered` (all strictly inside the
    /// window, base excluded) already reached the receiver.
    pub fn with_delivered(
        base_seq: u64,
        width: u32,
        delivered: &[u64],
    ) -> Result<Self, WindowError> {
        if width == 0 || width > MAX_WINDOW {
            return Err(WindowError::BadWidth(width));
        }
        let mut state = WindowState {
            base_seq,
            width,
            scoreboard: 0,
        };
        for &seq in delivered {
            if seq == base_seq {
                return Err(WindowError::BaseDelivered(seq));
            }
            state.scoreboard |= 1 << state.offset(seq)?;
        }
        Ok(state)
    }

    pub fn base_seq(&self) -> u64 {
        self.base_seq
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Last sequence number inside the window.
    pub fn end_seq(&self) -> u64 {
        self.base_seq + u64::from(self.width) - 1
    }

    /// Delivered MPDUs still inside the window (`I`).
    pub fn delivered_count(&self) -> u32 {
        self.scoreboard.count_ones()
    }

    pub fn is_delivered(&self, seq: u64) -> bool {
        match self.offset(seq) {
            Ok(off) => self.scoreboard >> off & 1 == 1,
            Err(_) => seq < self.base_seq,
        }
    }

    /// Delivered sequence numbers inside the window, ascending.
    pub fn delivered_seqs(&self) -> Vec<u64> {
        (0..self.width)
            .filter(|i| self.scoreboard >> i & 1 == 1)
            .map(|i| self.base_seq + u64::from(i))
            .collect()
    }

    fn offset(&self, seq: u64) -> Result<u32, WindowError> {
        if seq < self.base_seq || seq > self.end_seq() {
            return Err(WindowError::OutOfWindow {
                seq,
                base: self.base_seq,
                end: self.end_seq(),
            });
        }
        Ok((seq - self.base_seq) as u32)
    }

    /// The `min(k, W - I)` smallest undelivered sequence numbers, ascending.
    pub fn select_xmin(&self, k: u32) -> Result<Vec<u64>, WindowError> {
        let mut out = Vec::with_capacity(k as usize);
        self.select_xmin_into(k, &mut out)?;
        Ok(out)
    }

    /// Same as [`select_xmin`](Self::select_xmin), reusing `out`.
    pub fn select_xmin_into(&self, k: u32, out: &mut Vec<u64>) -> Result<(), WindowError> {
        if k == 0 || k > self.width {
            return Err(WindowError::BadK {
                k,
                width: self.width,
            });
        }
        out.clear();
        let x = k.min(self.width - self.delivered_count()) as usize;
        let mut pending = !self.scoreboard & self.mask();
        while out.len() < x {
            let i = pending.trailing_zeros();
            out.push(self.base_seq + u64::from(i));
            pending &= pending - 1;
        }
        Ok(())
    }

    /// [`select_xmin`](Self::select_xmin) as a bitmap of offsets from the base.
    pub fn xmin_offsets(&self, k: u32) -> Result<u64, WindowError> {
        if k == 0 || k > self.width {
            return Err(WindowError::BadK {
                k,
                width: self.width,
            });
        }
        let mut pending = !self.scoreboard & self.mask();
        if pending.count_ones() <= k {
            return Ok(pending);
        }
        let mut picked = 0u64;
        for _ in 0..k {
            let low = pending & pending.wrapping_neg();
            picked |= low;
            pending ^= low;
        }
        Ok(picked)
    }

    /// [`apply_back`](Self::apply_back) for a bitmap of offsets from the base.
    pub fn apply_back_offsets(&mut self, acked: u64) -> Result<u32, WindowError> {
        if acked & !self.mask() != 0 {
            let off = 63 - (acked & !self.mask()).leading_zeros();
            let seq = self.base_seq + u64::from(off);
            return Err(WindowError::OutOfWindow {
                seq,
                base: self.base_seq,
                end: self.end_seq(),
            });
        }
        let newly = (acked & !self.scoreboard).count_ones();
        self.scoreboard |= acked;
        let slide = self.scoreboard.trailing_ones();
        if slide > 0 {
            self.base_seq += u64::from(slide);
            self.scoreboard = if slide >= 64 {
                0
            } else {
                self.scoreboard >> slide
            };
        }
        Ok(newly)
    }

    fn mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    /// Applies a Block Ack: marks `delivered_now` and slides the base past the
    /// contiguous delivered prefix. Returns how many MPDUs were newly
    /// delivered. Nothing is changed if any sequence number is out of window.
    pub fn apply_back(&mut self, delivered_now: &[u64]) -> Result<u32, WindowError> {
        let mut acked = 0u64;
        for &seq in delivered_now {
            acked |= 1 << self.offset(seq)?;
        }
        self.apply_back_offsets(acked)
    }
}
