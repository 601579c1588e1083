//! Scenario comparison across cascade traces.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cascade::CascadeTrace;
use crate::error::{Error, Result};
use crate::grid::BranchId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub label: String,
    pub branch: BranchId,
    pub delta: f64,
    pub facts: bool,
    pub relay_period: f64,
    pub outages: usize,
    pub islands: usize,
    pub final_cost: f64,
    pub end_time: f64,
    /// Outage reduction against the first scenario, in percent. Absent for
    /// the first row and when the reference has no outages.
    pub outage_reduction_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ScenarioRow>,
}

/// 100 (N_ref − N) / N_ref.
pub fn reduction_pct(reference: usize, outages: usize) -> Option<f64> {
    (reference > 0).then(|| 100.0 * (reference as f64 - outages as f64) / reference as f64)
}

/// Build the comparison table; the first trace is the reference scenario.
pub fn compare(traces: &[(String, CascadeTrace)]) -> Result<ComparisonReport> {
    let Some((_, first)) = traces.first() else {
        return Err(Error::Config("report needs at least one trace".into()));
    };
    let reference = first.outage_count();
    let rows = traces
        .iter()
        .enumerate()
        .map(|(i, (label, t))| ScenarioRow {
            label: label.clone(),
            branch: t.disturbance.branch,
            delta: t.disturbance.delta,
            facts: t.config.facts_enabled,
            relay_period: t.config.relay_period,
            outages: t.outage_count(),
            islands: t.island_count(),
            final_cost: t.final_cost,
            end_time: t.end_time(),
            outage_reduction_pct: if i == 0 {
                None
            } else {
                reduction_pct(reference, t.outage_count())
            },
        })
        .collect();
    Ok(ComparisonReport { rows })
}

impl ComparisonReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table for terminals.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<24} {:>6} {:>9} {:>5} {:>5} {:>8} {:>8} {:>10} {:>8} {:>10}\n",
            "scenario", "branch", "delta", "facts", "T", "outages", "islands", "J", "end_s", "reduction"
        );
        for r in &self.rows {
            let red = r.outage_reduction_pct.map_or("-".to_string(), |p| format!("{p:.1}%"));
            let _ = writeln!(
                s,
                "{:<24} {:>6} {:>9.4} {:>5} {:>5} {:>8} {:>8} {:>10.4} {:>8} {:>10}",
                r.label,
                r.branch,
                r.delta,
                if r.facts { "on" } else { "off" },
                r.relay_period,
                r.outages,
                r.islands,
                r.final_cost,
                r.end_time,
                red
            );
        }
        s
    }
}
