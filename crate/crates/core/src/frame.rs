//! Frame geometry, PSDU airtime and the closed-form single-transmission
//! throughput of an A-MPDU / Two-Level aggregated PSDU.
//!
//! Every size here is in octets unless the name says otherwise; every
//! duration is in microseconds, so `bits / µs` comes out directly in Mbps.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Largest MSDU the MAC accepts.
pub const MAX_MSDU_BYTES: u32 = 2304;
/// Largest MPDU (header + body + FCS, no delimiter) inside an A-MPDU.
pub const MAX_MPDU_BYTES: u64 = 11_454;
/// Largest A-MPDU / PSDU.
pub const MAX_PSDU_BYTES: u64 = 1_048_575;
/// Distinct sequence numbers a compressed Block Ack bitmap can cover.
pub const MAX_DISTINCT_MPDUS: usize = 64;
/// PPDU duration ceiling for a single transmission.
pub const MAX_PSDU_AIRTIME_US: f64 = 5400.0;
/// Largest A-MSDU fan-out studied.
pub const MAX_MSDUS_PER_MPDU: u32 = 7;

/// The four MCS9 working points: 4 streams/160 MHz and 3, 2, 1 streams/80 MHz.
pub const GRID_RATES_MBPS: [f64; 4] = [433.3, 866.7, 1299.9, 3466.8];
/// MSDU lengths of the reference grid.
pub const GRID_MSDU_BYTES: [u32; 4] = [128, 512, 1024, 1500];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("MSDU of {0} bytes exceeds the {MAX_MSDU_BYTES}-byte MSDU limit")]
    MsduTooLong(u32),
    #[error("MSDU size must be positive")]
    EmptyMsdu,
    #[error("MPDU of {0} bytes exceeds the {MAX_MPDU_BYTES}-byte MPDU limit")]
    MpduTooLong(u64),
    #[error("msdus_per_mpdu = {0} is outside 1..={MAX_MSDUS_PER_MPDU}")]
    BadMsduCount(u32),
    #[error("A-MPDU mode carries exactly one MSDU per MPDU, got {0}")]
    AmpduWithAmsdu(u32),
    #[error("PSDU plan is empty")]
    EmptyPlan,
    #[error("PSDU plan sequence numbers must be strictly increasing (saw {prev} then {next})")]
    UnorderedPlan { prev: u64, next: u64 },
    #[error("MPDU {0} is planned with zero copies")]
    ZeroCopies(u64),
    #[error("aggregation degree X = {0} is outside 1..={MAX_DISTINCT_MPDUS}")]
    DistinctOutOfRange(u32),
    #[error("success probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("invalid timing profile: {0}")]
    BadTiming(&'static str),
    #[error("PHY rate must be positive, got {0}")]
    BadRate(f64),
}

/// Fixed per-transmission MAC/PHY overheads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacTimingProfile {
    pub aifs_us: f64,
    pub slot_time_us: f64,
    pub avg_backoff_us: f64,
    pub phy_preamble_us: f64,
    pub sifs_us: f64,
    /// Block Ack airtime at the 24 Mbps basic rate, legacy preamble included.
    pub back_time_us: f64,
    pub t_sym_us: f64,
    /// SERVICE (16) + TAIL (6).
    pub service_tail_bits: u32,
}

impl Default for MacTimingProfile {
    /// Best Effort access category, 3 spatial streams.
    fn default() -> Self {
        MacTimingProfile {
            aifs_us: 43.0,
            slot_time_us: 9.0,
            // half of CWmin (15 slots), no collisions
            avg_backoff_us: 7.5 * 9.0,
            phy_preamble_us: 43.0,
            sifs_us: 16.0,
            back_time_us: 32.0,
            t_sym_us: 4.0,
            service_tail_bits: 22,
        }
    }
}

impl MacTimingProfile {
    pub fn validate(&self) -> Result<(), FrameError> {
        let durations = [
            (self.aifs_us, "aifs_us must be positive"),
            (self.slot_time_us, "slot_time_us must be positive"),
            (self.avg_backoff_us, "avg_backoff_us must be positive"),
            (self.phy_preamble_us, "phy_preamble_us must be positive"),
            (self.sifs_us, "sifs_us must be positive"),
            (self.back_time_us, "back_time_us must be positive"),
            (self.t_sym_us, "t_sym_us must be positive"),
        ];
        for (value, msg) in durations {
            if !(value.is_finite() && value > 0.0) {
                return Err(FrameError::BadTiming(msg));
            }
        }
        Ok(())
    }

    /// Channel time spent on everything except the PSDU itself:
    /// AIFS + BackOff + PHY preamble + SIFS + BAck.
    pub fn c1(&self) -> f64 {
        self.aifs_us + self.avg_backoff_us + self.phy_preamble_us + self.sifs_us + self.back_time_us
    }
}

/// Data rate of the PHY and the number of data bits carried per OFDM symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhyProfile {
    pub rate_mbps: f64,
    pub data_bits_per_symbol: f64,
}

impl PhyProfile {
    pub fn new(rate_mbps: f64, timing: &MacTimingProfile) -> Result<Self, FrameError> {
        if !(rate_mbps.is_finite() && rate_mbps > 0.0) {
            return Err(FrameError::BadRate(rate_mbps));
        }
        Ok(PhyProfile {
            rate_mbps,
            data_bits_per_symbol: rate_mbps * timing.t_sym_us,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    /// One MSDU per MPDU.
    Ampdu,
    /// A-MSDUs inside an A-MPDU.
    TwoLevel,
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregationMode::Ampdu => f.write_str("ampdu"),
            AggregationMode::TwoLevel => f.write_str("two_level"),
        }
    }
}

impl std::str::FromStr for AggregationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ampdu" | "a_mpdu" => Ok(AggregationMode::Ampdu),
            "two_level" | "twolevel" => Ok(AggregationMode::TwoLevel),
            other => Err(format!(
                "unknown aggregation mode '{other}' (expected ampdu or two_level)"
            )),
        }
    }
}

/// Shape of one aggregated MPDU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameGeometry {
    pub msdu_bytes: u32,
    pub msdus_per_mpdu: u32,
    pub mode: AggregationMode,
    pub mac_delimiter_bytes: u32,
    pub mac_header_bytes: u32,
    pub fcs_bytes: u32,
    pub subframe_header_bytes: u32,
}

fn pad4(n: u64) -> u64 {
    n.div_ceil(4) * 4
}

impl FrameGeometry {
    pub fn ampdu(msdu_bytes: u32) -> Result<Self, FrameError> {
        Self::with_mode(AggregationMode::Ampdu, msdu_bytes, 1)
    }

    pub fn two_level(msdu_bytes: u32, msdus_per_mpdu: u32) -> Result<Self, FrameError> {
        Self::with_mode(AggregationMode::TwoLevel, msdu_bytes, msdus_per_mpdu)
    }

    pub fn with_mode(
        mode: AggregationMode,
        msdu_bytes: u32,
        msdus_per_mpdu: u32,
    ) -> Result<Self, FrameError> {
        let geom = FrameGeometry {
            msdu_bytes,
            msdus_per_mpdu,
            mode,
            mac_delimiter_bytes: 4,
            // 4 + 32 + 4 + L padded gives the 168/552/1064/1540 MPDU sizes
            mac_header_bytes: 32,
            fcs_bytes: 4,
            subframe_header_bytes: 14,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        if self.msdu_bytes == 0 {
            return Err(FrameError::EmptyMsdu);
        }
        if self.msdu_bytes > MAX_MSDU_BYTES {
            return Err(FrameError::MsduTooLong(self.msdu_bytes));
        }
        if self.msdus_per_mpdu == 0 || self.msdus_per_mpdu > MAX_MSDUS_PER_MPDU {
            return Err(FrameError::BadMsduCount(self.msdus_per_mpdu));
        }
        if self.mode == AggregationMode::Ampdu && self.msdus_per_mpdu != 1 {
            return Err(FrameError::AmpduWithAmsdu(self.msdus_per_mpdu));
        }
        let mpdu = self.mpdu_bytes();
        if mpdu > MAX_MPDU_BYTES {
            return Err(FrameError::MpduTooLong(mpdu));
        }
        Ok(())
    }

    /// MSDU payload bits carried by one MPDU.
    pub fn payload_bits(&self) -> u64 {
        8 * u64::from(self.msdu_bytes) * u64::from(self.msdus_per_mpdu)
    }

    fn body_bytes(&self) -> u64 {
        match self.mode {
            AggregationMode::Ampdu => u64::from(self.msdu_bytes),
            AggregationMode::TwoLevel => {
                let subframe =
                    pad4(u64::from(self.subframe_header_bytes) + u64::from(self.msdu_bytes));
                u64::from(self.msdus_per_mpdu) * subframe
            }
        }
    }

    /// MAC header + body + FCS, without delimiter or trailing pad.
    pub fn mpdu_bytes(&self) -> u64 {
        u64::from(self.mac_header_bytes) + self.body_bytes() + u64::from(self.fcs_bytes)
    }

    /// Bytes one MPDU copy occupies inside the PSDU: delimiter, MPDU and pad
    /// to a 4-octet boundary.
    pub fn element_bytes(&self) -> u64 {
        pad4(u64::from(self.mac_delimiter_bytes) + self.mpdu_bytes())
    }
}

/// Checked wrapper around [`FrameGeometry::element_bytes`].
pub fn mpdu_element_bytes(geom: &FrameGeometry) -> Result<u64, FrameError> {
    geom.validate()?;
    Ok(geom.element_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub seq: u64,
    pub copies: u32,
}

/// The MPDUs put into one PSDU, each with its number of identical copies.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PsduPlan {
    entries: Vec<PlanEntry>,
}

impl PsduPlan {
    /// Sequence numbers must be strictly increasing and every copy count
    /// positive. An empty plan is representable but cannot be sized.
    pub fn new(entries: Vec<PlanEntry>) -> Result<Self, FrameError> {
        for pair in entries.windows(2) {
            if pair[1].seq <= pair[0].seq {
                return Err(FrameError::UnorderedPlan {
                    prev: pair[0].seq,
                    next: pair[1].seq,
                });
            }
        }
        if let Some(e) = entries.iter().find(|e| e.copies == 0) {
            return Err(FrameError::ZeroCopies(e.seq));
        }
        Ok(PsduPlan { entries })
    }

    /// `x` consecutive sequence numbers starting at 0, one copy each.
    pub fn single_copies(x: u32) -> Self {
        PsduPlan {
            entries: (0..u64::from(x))
                .map(|seq| PlanEntry { seq, copies: 1 })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn distinct_count(&self) -> usize {
        self.entries.len()
    }

    pub fn total_copies(&self) -> u64 {
        self.entries.iter().map(|e| u64::from(e.copies)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Octets of all MPDU copies in the PSDU.
pub fn psdu_bytes(plan: &PsduPlan, geom: &FrameGeometry) -> Result<u64, FrameError> {
    if plan.is_empty() {
        return Err(FrameError::EmptyPlan);
    }
    Ok(plan.total_copies() * geom.element_bytes())
}

/// PSDU length in bits as seen by the PHY, including SERVICE and TAIL.
pub fn psdu_bits(
    plan: &PsduPlan,
    geom: &FrameGeometry,
    timing: &MacTimingProfile,
) -> Result<u64, FrameError> {
    Ok(8 * psdu_bytes(plan, geom)? + u64::from(timing.service_tail_bits))
}

fn symbols_for_bits(bits: u64, phy: &PhyProfile) -> f64 {
    (bits as f64 / phy.data_bits_per_symbol).ceil()
}

/// PSDU airtime, rounded up to a whole number of OFDM symbols.
pub fn psdu_airtime_us(
    plan: &PsduPlan,
    geom: &FrameGeometry,
    timing: &MacTimingProfile,
    phy: &PhyProfile,
) -> Result<f64, FrameError> {
    let bits = psdu_bits(plan, geom, timing)?;
    Ok(timing.t_sym_us * symbols_for_bits(bits, phy))
}

/// Airtime of a PSDU carrying `total_copies` MPDU elements, without building
/// a plan. Agrees with [`psdu_airtime_us`] for any plan with that many copies.
pub fn airtime_for_copies(
    total_copies: u64,
    geom: &FrameGeometry,
    timing: &MacTimingProfile,
    phy: &PhyProfile,
) -> f64 {
    let bits = 8 * total_copies * geom.element_bytes() + u64::from(timing.service_tail_bits);
    timing.t_sym_us * symbols_for_bits(bits, phy)
}

/// A standard limit a PSDU plan breaks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanViolation {
    Empty,
    TooManyDistinct { count: usize },
    AirtimeExceeded { airtime_us: f64 },
    PsduTooLong { bytes: u64 },
    MpduTooLong { bytes: u64 },
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanViolation::Empty => f.write_str("empty plan"),
            PlanViolation::TooManyDistinct { count } => {
                write!(f, "{count} distinct MPDUs > {MAX_DISTINCT_MPDUS}")
            }
            PlanViolation::AirtimeExceeded { airtime_us } => {
                write!(f, "airtime {airtime_us} us > {MAX_PSDU_AIRTIME_US} us")
            }
            PlanViolation::PsduTooLong { bytes } => {
                write!(f, "PSDU {bytes} bytes > {MAX_PSDU_BYTES}")
            }
            PlanViolation::MpduTooLong { bytes } => {
                write!(f, "MPDU {bytes} bytes > {MAX_MPDU_BYTES}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanVerdict {
    Accept,
    Reject(Vec<PlanViolation>),
}

impl PlanVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, PlanVerdict::Accept)
    }
}

/// Checks a plan against every standard limit and reports all that fail.
pub fn validate_plan(
    plan: &PsduPlan,
    geom: &FrameGeometry,
    timing: &MacTimingProfile,
    phy: &PhyProfile,
) -> PlanVerdict {
    if plan.is_empty() {
        return PlanVerdict::Reject(vec![PlanViolation::Empty]);
    }
    let mut violations = Vec::new();
    if plan.distinct_count() > MAX_DISTINCT_MPDUS {
        violations.push(PlanViolation::TooManyDistinct {
            count: plan.distinct_count(),
        });
    }
    let airtime = airtime_for_copies(plan.total_copies(), geom, timing, phy);
    if airtime > MAX_PSDU_AIRTIME_US {
        violations.push(PlanViolation::AirtimeExceeded {
            airtime_us: airtime,
        });
    }
    let bytes = plan.total_copies() * geom.element_bytes();
    if bytes > MAX_PSDU_BYTES {
        violations.push(PlanViolation::PsduTooLong { bytes });
    }
    if geom.mpdu_bytes() > MAX_MPDU_BYTES {
        violations.push(PlanViolation::MpduTooLong {
            bytes: geom.mpdu_bytes(),
        });
    }
    if violations.is_empty() {
        PlanVerdict::Accept
    } else {
        PlanVerdict::Reject(violations)
    }
}

/// Closed-form throughput (Mbps) of one transmission of `x_distinct`
/// single-copy MPDUs, each delivered with probability `p_succ`.
pub fn analytic_throughput(
    x_distinct: u32,
    p_succ: f64,
    geom: &FrameGeometry,
    timing: &MacTimingProfile,
    phy: &PhyProfile,
) -> Result<f64, FrameError> {
    if x_distinct == 0 || x_distinct as usize > MAX_DISTINCT_MPDUS {
        return Err(FrameError::DistinctOutOfRange(x_distinct));
    }
    if !(0.0..=1.0).contains(&p_succ) {
        return Err(FrameError::BadProbability(p_succ));
    }
    geom.validate()?;
    let airtime = airtime_for_copies(u64::from(x_distinct), geom, timing, phy);
    let bits = geom.payload_bits() as f64 * f64::from(x_distinct) * p_succ;
    Ok(bits / (timing.c1() + airtime))
}
