//! Tidy `x,y,group,stderr` tables derived from run records.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::records::ExperimentRecord;
use crate::analysis::{expected_join_matrix, min_eigenvalue};
use crate::error::{CoreError, Result};
use crate::oracle::GraphKind;

pub const PLOT_KINDS: [&str; 4] = ["rate-vs-eps", "rate-vs-rho", "y-histogram", "spectrum-vs-rho"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotRow {
    pub x: f64,
    pub y: f64,
    pub group: String,
    pub stderr: f64,
}

fn key(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

/// Non-accept rate per (group, x).
fn rate_vs(records: &[ExperimentRecord], x_of: impl Fn(&ExperimentRecord) -> f64, group_of: impl Fn(&ExperimentRecord) -> String) -> Vec<PlotRow> {
    let mut acc: BTreeMap<(String, i64), (f64, u64, u64)> = BTreeMap::new();
    for r in records {
        let x = x_of(r);
        let e = acc.entry((group_of(r), key(x))).or_insert((x, 0, 0));
        e.1 += 1;
        if r.verdict != "ACCEPT" {
            e.2 += 1;
        }
    }
    acc.into_iter()
        .map(|((group, _), (x, n, rej))| {
            let p = rej as f64 / n as f64;
            PlotRow { x, y: p, group, stderr: (p * (1.0 - p) / n as f64).sqrt() }
        })
        .collect()
}

fn y_histogram(records: &[ExperimentRecord], bins: usize) -> Vec<PlotRow> {
    let vals: Vec<(&ExperimentRecord, f64)> = records.iter().filter_map(|r| r.stat.map(|s| (r, s))).collect();
    if vals.is_empty() {
        return Vec::new();
    }
    let lo = vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let hi = vals.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (r, s) in &vals {
        let b = (((s - lo) / width) as usize).min(bins - 1);
        counts.entry(format!("{} n={} rho={}", r.family, r.n, r.rho)).or_insert_with(|| vec![0; bins])[b] += 1;
    }
    let mut out = Vec::new();
    for (group, c) in counts {
        let total: u64 = c.iter().sum();
        for (b, &k) in c.iter().enumerate() {
            let p = k as f64 / total as f64;
            out.push(PlotRow {
                x: lo + (b as f64 + 0.5) * width,
                y: p,
                group: group.clone(),
                stderr: (p * (1.0 - p) / total as f64).sqrt(),
            });
        }
    }
    out
}

/// Smallest eigenvalue of the expected join matrix at every (kind, n, ρ) in the records.
fn spectrum_vs_rho(records: &[ExperimentRecord]) -> Result<Vec<PlotRow>> {
    let mut seen: BTreeMap<(String, u32, i64), f64> = BTreeMap::new();
    for r in records {
        seen.insert((r.kind.clone(), r.n, key(r.rho)), r.rho);
    }
    let mut out = Vec::new();
    for ((kind, n, _), rho) in seen {
        let gk = match kind.as_str() {
            "path" => GraphKind::Path,
            "cycle" => GraphKind::Cycle,
            other => return Err(CoreError::Parse(format!("graph kind {other}"))),
        };
        let phi = expected_join_matrix(gk, n as usize, rho)?;
        out.push(PlotRow { x: rho, y: min_eigenvalue(&phi)?, group: format!("{kind} n={n}"), stderr: 0.0 });
    }
    Ok(out)
}

pub fn plot_data(kind: &str, records: &[ExperimentRecord]) -> Result<Vec<PlotRow>> {
    let group = |r: &ExperimentRecord| format!("{} {} {} {}", r.op, r.family, r.preset, r.kind);
    match kind {
        "rate-vs-eps" => Ok(rate_vs(records, |r| r.eps, |r| format!("{} n={} rho={}", group(r), r.n, r.rho))),
        "rate-vs-rho" => Ok(rate_vs(records, |r| r.rho, |r| format!("{} n={} eps={}", group(r), r.n, r.eps))),
        "y-histogram" => Ok(y_histogram(records, 30)),
        "spectrum-vs-rho" => spectrum_vs_rho(records),
        other => Err(CoreError::Parse(format!("unknown plot kind {other}; expected one of {}", PLOT_KINDS.join(", ")))),
    }
}

pub fn write_plot_csv<W: Write>(rows: &[PlotRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| CoreError::Io(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}
