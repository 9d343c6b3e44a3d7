//! Result tables and their CSV / JSON encodings.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use ampdu_sim_core::channel::ber_from_per;
use ampdu_sim_core::engine::{GridPoint, KSweep, StrategyComparison};
use ampdu_sim_core::frame::FrameGeometry;
use ampdu_sim_core::{AggregationMode, Strategy};
use anyhow::Context;
use serde::Serialize;

use crate::spec::Format;

/// One strategy at one grid point. Field order is the CSV column order.
#[derive(Debug, Clone, Serialize)]
pub struct RunRow {
    pub mode: AggregationMode,
    pub msdu_bytes: u32,
    pub msdus_per_mpdu: u32,
    pub rate_mbps: f64,
    pub per: f64,
    pub strategy: Strategy,
    pub best_k: Option<u32>,
    pub attempts: u64,
    pub seed: u64,
    pub throughput_mbps: Option<f64>,
    pub ci95_mbps: Option<f64>,
    pub improvement_over_base_pct: Option<f64>,
    pub infeasible: bool,
}

/// Best strategy at one grid point, with the PER also expressed as a BER
/// over the bits of one MPDU element.
#[derive(Debug, Clone, Serialize)]
pub struct BestRow {
    pub mode: AggregationMode,
    pub msdu_bytes: u32,
    pub msdus_per_mpdu: u32,
    pub rate_mbps: f64,
    pub per: f64,
    pub ber: Option<f64>,
    pub best_strategy: Strategy,
    pub best_k: Option<u32>,
    pub attempts: u64,
    pub seed: u64,
    pub base_throughput_mbps: Option<f64>,
    pub best_throughput_mbps: Option<f64>,
    pub ci95_mbps: Option<f64>,
    pub improvement_over_base_pct: Option<f64>,
}

/// One `k` of a K-sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub mode: AggregationMode,
    pub msdu_bytes: u32,
    pub msdus_per_mpdu: u32,
    pub rate_mbps: f64,
    pub per: f64,
    pub strategy: Strategy,
    pub k: u32,
    pub attempts: u64,
    pub seed: u64,
    pub throughput_mbps: Option<f64>,
    pub ci95_mbps: Option<f64>,
    pub infeasible: bool,
}

pub fn run_rows(
    point: &GridPoint,
    cmp: &StrategyComparison,
    attempts: u64,
    seed: u64,
) -> Vec<RunRow> {
    cmp.outcomes
        .iter()
        .map(|o| RunRow {
            mode: point.mode,
            msdu_bytes: point.msdu_bytes,
            msdus_per_mpdu: point.msdus_per_mpdu,
            rate_mbps: point.rate_mbps,
            per: point.per,
            strategy: o.strategy,
            best_k: o.best_k,
            attempts,
            seed,
            throughput_mbps: o.throughput_mbps,
            ci95_mbps: o.ci95_mbps,
            improvement_over_base_pct: o.improvement_over_base_pct,
            infeasible: o.infeasible,
        })
        .collect()
}

pub fn best_row(point: &GridPoint, cmp: &StrategyComparison, attempts: u64, seed: u64) -> BestRow {
    let best = cmp.best();
    let element_bits = FrameGeometry::with_mode(point.mode, point.msdu_bytes, point.msdus_per_mpdu)
        .map(|g| 8 * g.element_bytes())
        .ok();
    BestRow {
        mode: point.mode,
        msdu_bytes: point.msdu_bytes,
        msdus_per_mpdu: point.msdus_per_mpdu,
        rate_mbps: point.rate_mbps,
        per: point.per,
        ber: element_bits.and_then(|b| ber_from_per(point.per, b).ok()),
        best_strategy: best.strategy,
        best_k: best.best_k,
        attempts,
        seed,
        base_throughput_mbps: cmp.base().throughput_mbps,
        best_throughput_mbps: best.throughput_mbps,
        ci95_mbps: best.ci95_mbps,
        improvement_over_base_pct: best.improvement_over_base_pct,
    }
}

pub fn sweep_rows(
    point: &GridPoint,
    strategy: Strategy,
    sweep: &KSweep,
    attempts: u64,
    seed: u64,
) -> Vec<SweepRow> {
    sweep
        .per_k
        .iter()
        .map(|(k, r)| SweepRow {
            mode: point.mode,
            msdu_bytes: point.msdu_bytes,
            msdus_per_mpdu: point.msdus_per_mpdu,
            rate_mbps: point.rate_mbps,
            per: point.per,
            strategy,
            k: *k,
            attempts,
            seed,
            throughput_mbps: r.throughput_mbps,
            ci95_mbps: (!r.infeasible).then_some(r.ci95_mbps),
            infeasible: r.infeasible,
        })
        .collect()
}

/// CSV cell text. Floats use `Display`, which never switches to exponent
/// notation and round-trips exactly.
fn cell(v: &serde_json::Value) -> String {
    use serde_json::Value;
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (_, Some(i), _) => i.to_string(),
            (_, _, Some(f)) => f.to_string(),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes `rows` to `out` (stdout when `None`).
pub fn emit<R: Serialize>(rows: &[R], format: Format, out: Option<&Path>) -> anyhow::Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    write_rows(rows, format, sink)
}

pub fn write_rows<R: Serialize, W: Write>(
    rows: &[R],
    format: Format,
    mut sink: W,
) -> anyhow::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            for (i, row) in rows.iter().enumerate() {
                let serde_json::Value::Object(fields) = serde_json::to_value(row)? else {
                    anyhow::bail!("table rows must be structs");
                };
                if i == 0 {
                    w.write_record(fields.keys())?;
                }
                w.write_record(fields.values().map(cell))?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, rows)?;
            writeln!(sink)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUN_HEADER: &str =
        "mode,msdu_bytes,msdus_per_mpdu,rate_mbps,per,strategy,best_k,attempts,seed,\
throughput_mbps,ci95_mbps,improvement_over_base_pct,infeasible";

    fn row(throughput: Option<f64>) -> RunRow {
        RunRow {
            mode: AggregationMode::Ampdu,
            msdu_bytes: 1500,
            msdus_per_mpdu: 1,
            rate_mbps: 1299.9,
            per: 0.05,
            strategy: "2MPDU3".parse().unwrap(),
            best_k: throughput.map(|_| 17),
            attempts: 200_000,
            seed: 0,
            throughput_mbps: throughput,
            ci95_mbps: throughput.map(|_| 1e-7),
            improvement_over_base_pct: throughput.map(|_| -0.25),
            infeasible: throughput.is_none(),
        }
    }

    #[test]
    fn csv_header_is_stable() {
        let mut buf = Vec::new();
        write_rows(&[row(Some(948.7338))], Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RUN_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "ampdu,1500,1,1299.9,0.05,2MPDU3,17,200000,0,948.7338,0.0000001,-0.25,false"
        );
    }

    #[test]
    fn infeasible_rows_leave_numbers_empty() {
        let mut buf = Vec::new();
        write_rows(&[row(None)], Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "ampdu,1500,1,1299.9,0.05,2MPDU3,,200000,0,,,,true"
        );
    }

    #[test]
    fn json_mirrors_csv_fields() {
        let mut buf = Vec::new();
        write_rows(&[row(Some(1.5))], Format::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let keys: Vec<&str> = v[0]
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        let mut want: Vec<&str> = RUN_HEADER.split(',').collect();
        want.sort_unstable();
        let mut keys = keys;
        keys.sort_unstable();
        assert_eq!(keys, want);
        assert_eq!(v[0]["strategy"], "2MPDU3");
    }
}
