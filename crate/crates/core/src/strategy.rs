//! Blind duplication policies and PSDU plan construction.
//!
//! Names follow `base`, `<d>MPDU<c>` (the first `d` MPDUs of the
//! transmission set are sent `c` times) and `ALL<c>` (every MPDU is sent `c`
//! times), matched case-insensitively.

use crate::frame::{FrameError, PlanEntry, PsduPlan};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const MAX_NAMED_HEADS: u32 = 5;
pub const MIN_NAMED_COPIES: u32 = 2;
pub const MAX_NAMED_COPIES: u32 = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error(
        "unrecognized strategy '{0}': expected 'base', '<d>mpdu<c>' with d in 1..=5 and c in 2..=5, \
         or 'all<c>' with c in 2..=5"
    )]
    Parse(String),
    #[error("a strategy needs at least one copy")]
    ZeroCopies,
}

/// How many leading MPDUs of the transmission set are duplicated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HeadCount {
    Count(u32),
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Strategy {
    head: HeadCount,
    copies: u32,
}

impl Strategy {
    pub const BASE: Strategy = Strategy {
        head: HeadCount::Count(0),
        copies: 1,
    };

    /// Any duplication that sends nothing twice is normalised to `BASE`.
    pub fn new(head: HeadCount, copies: u32) -> Result<Self, StrategyError> {
        if copies == 0 {
            return Err(StrategyError::ZeroCopies);
        }
        if copies == 1 || head == HeadCount::Count(0) {
            return Ok(Self::BASE);
        }
        Ok(Strategy { head, copies })
    }

    pub fn head_mpdus(d: u32, copies: u32) -> Result<Self, StrategyError> {
        Self::new(HeadCount::Count(d), copies)
    }

    pub fn all(copies: u32) -> Result<Self, StrategyError> {
        Self::new(HeadCount::All, copies)
    }

    pub fn head(&self) -> HeadCount {
        self.head
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    pub fn is_base(&self) -> bool {
        *self == Self::BASE
    }

    /// Number of leading entries of an `x`-MPDU transmission set that get
    /// `copies` copies.
    pub fn duplicated_among(&self, x: usize) -> usize {
        match self.head {
            HeadCount::Count(d) => (d as usize).min(x),
            HeadCount::All => x,
        }
    }

    /// Copies of the MPDU at position `index` of the transmission set.
    pub fn copies_at(&self, index: usize) -> u32 {
        let duplicated = match self.head {
            HeadCount::Count(d) => index < d as usize,
            HeadCount::All => true,
        };
        if duplicated {
            self.copies
        } else {
            1
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.head {
            _ if self.is_base() => f.write_str("base"),
            HeadCount::Count(d) => write!(f, "{d}MPDU{}", self.copies),
            HeadCount::All => write!(f, "ALL{}", self.copies),
        }
    }
}

fn named_copies(s: &str) -> Option<u32> {
    let c: u32 = s.parse().ok()?;
    (MIN_NAMED_COPIES..=MAX_NAMED_COPIES)
        .contains(&c)
        .then_some(c)
}

impl FromStr for Strategy {
    type Err = StrategyError;

    fn from_str(name: &str) -> Result<Self, Self::Err> {
        let lower = name.trim().to_ascii_lowercase();
        let err = || StrategyError::Parse(name.to_string());
        if lower == "base" {
            return Ok(Self::BASE);
        }
        if let Some(rest) = lower.strip_prefix("all") {
            let c = named_copies(rest).ok_or_else(err)?;
            return Ok(Strategy {
                head: HeadCount::All,
                copies: c,
            });
        }
        let (d, c) = lower.split_once("mpdu").ok_or_else(err)?;
        let d: u32 = d.parse().map_err(|_| err())?;
        if !(1..=MAX_NAMED_HEADS).contains(&d) {
            return Err(err());
        }
        let c = named_copies(c).ok_or_else(err)?;
        Ok(Strategy {
            head: HeadCount::Count(d),
            copies: c,
        })
    }
}

pub fn parse_strategy(name: &str) -> Result<Strategy, StrategyError> {
    name.parse()
}

impl TryFrom<String> for Strategy {
    type Error = StrategyError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.to_string()
    }
}

/// Base, Set1 to Set4 (`1MPDU2` .. `4MPDU5`) and Set5 (`ALL2` .. `ALL5`).
pub fn standard_methods() -> Vec<Strategy> {
    let mut out = vec![Strategy::BASE];
    for d in 1..=4 {
        out.extend(set(d));
    }
    out.extend(set5());
    out
}

/// [`standard_methods`] plus the five-head variants `5MPDU2` .. `5MPDU5`.
pub fn all_presets() -> Vec<Strategy> {
    let mut out = standard_methods();
    out.extend(set(5));
    out
}

/// `dMPDU2` .. `dMPDU5`.
pub fn set(d: u32) -> Vec<Strategy> {
    (MIN_NAMED_COPIES..=MAX_NAMED_COPIES)
        .map(|c| Strategy {
            head: HeadCount::Count(d),
            copies: c,
        })
        .collect()
}

/// `ALL2` .. `ALL5`.
pub fn set5() -> Vec<Strategy> {
    (MIN_NAMED_COPIES..=MAX_NAMED_COPIES)
        .map(|c| Strategy {
            head: HeadCount::All,
            copies: c,
        })
        .collect()
}

/// Plan for one transmission: the first duplicated entries carry
/// `strat.copies()` copies, the rest one copy, in `xmin` order.
pub fn build_plan(xmin: &[u64], strat: Strategy) -> Result<PsduPlan, FrameError> {
    PsduPlan::new(
        xmin.iter()
            .enumerate()
            .map(|(i, &seq)| PlanEntry {
                seq,
                copies: strat.copies_at(i),
            })
            .collect(),
    )
}
