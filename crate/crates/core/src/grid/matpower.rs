//! Restricted reader for MATPOWER `.m` case files.
//!
//! Only `mpc.baseMVA`, `mpc.bus`, `mpc.gen` and `mpc.branch` are read. Net
//! injection is in-service generation minus demand, converted to per-unit.
//! Transformer taps, shunts and generator limits are ignored.

use std::collections::{BTreeMap, BTreeSet};

use super::{BranchRecord, BusKind, BusRecord, NetworkCase};

// MATPOWER column indices (zero based).
const BUS_I: usize = 0;
const BUS_TYPE: usize = 1;
const PD: usize = 2;
const GEN_BUS: usize = 0;
const PG: usize = 1;
const GEN_STATUS: usize = 7;
const F_BUS: usize = 0;
const T_BUS: usize = 1;
const BR_X: usize = 3;
const RATE_A: usize = 5;
const BR_STATUS: usize = 10;

const REF: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct MatpowerOptions {
    /// Threshold (per-unit) for branches whose `rateA` is zero.
    pub default_sigma: f64,
}

impl Default for MatpowerOptions {
    fn default() -> Self {
        Self { default_sigma: 1.0 }
    }
}

pub(super) fn parse(text: &str, options: &MatpowerOptions) -> Result<NetworkCase, String> {
    let text = strip_comments(text);
    let base_mva = scalar(&text, "baseMVA")?;
    let bus = table(&text, "bus", PD + 1)?;
    let gen = table(&text, "gen", GEN_STATUS + 1)?;
    let branch = table(&text, "branch", BR_STATUS + 1)?;

    let mut generation: BTreeMap<u32, f64> = BTreeMap::new();
    for row in &gen {
        if row[GEN_STATUS] > 0.0 {
            *generation.entry(to_id(row[GEN_BUS])?).or_default() += row[PG];
        }
    }

    let slack: Vec<u32> = bus
        .iter()
        .filter(|r| r[BUS_TYPE] == REF)
        .map(|r| to_id(r[BUS_I]))
        .collect::<Result<_, _>>()?;
    let slack_bus = match slack.as_slice() {
        [one] => *one,
        [] => return Err("no reference bus (type 3) in mpc.bus".into()),
        many => return Err(format!("multiple reference buses: {many:?}")),
    };

    let gen_buses: BTreeSet<u32> = generation.keys().copied().collect();
    let buses = bus
        .iter()
        .map(|r| {
            let id = to_id(r[BUS_I])?;
            let pg = generation.get(&id).copied().unwrap_or(0.0);
            let kind = if id == slack_bus {
                BusKind::Slack
            } else if gen_buses.contains(&id) {
                BusKind::Generator
            } else {
                BusKind::Load
            };
            Ok(BusRecord {
                id,
                p_injection: (pg - r[PD]) / base_mva,
                kind,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;

    let branches = branch
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(BranchRecord {
                id: (i + 1) as u32,
                from_bus: to_id(r[F_BUS])?,
                to_bus: to_id(r[T_BUS])?,
                reactance: r[BR_X],
                threshold: if r[RATE_A] > 0.0 {
                    r[RATE_A] / base_mva
                } else {
                    options.default_sigma
                },
                tcsc: None,
                live: r[BR_STATUS] != 0.0,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;

    Ok(NetworkCase {
        base_mva,
        slack_bus,
        buses,
        branches,
        hvdc: Vec::new(),
    })
}

fn strip_comments(text: &str) -> String {
    text.lines()
        .map(|l| l.split('%').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn to_id(v: f64) -> Result<u32, String> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(format!("expected a non-negative integer id, got {v}"))
    }
}

fn assignment<'a>(text: &'a str, field: &str) -> Result<&'a str, String> {
    let key = format!("mpc.{field}");
    let mut rest = text;
    while let Some(pos) = rest.find(&key) {
        let after = &rest[pos + key.len()..];
        let trimmed = after.trim_start();
        if let Some(value) = trimmed.strip_prefix('=') {
            return Ok(value);
        }
        rest = after;
    }
    Err(format!("missing assignment to {key}"))
}

fn scalar(text: &str, field: &str) -> Result<f64, String> {
    let value = assignment(text, field)?;
    let end = value.find(';').unwrap_or(value.len());
    value[..end].trim().parse().map_err(|e| format!("mpc.{field}: {e}"))
}

fn table(text: &str, field: &str, min_cols: usize) -> Result<Vec<Vec<f64>>, String> {
    let value = assignment(text, field)?;
    let open = value.find('[').ok_or_else(|| format!("mpc.{field}: expected '['"))?;
    let close = value
        .find(']')
        .ok_or_else(|| format!("mpc.{field}: unterminated matrix"))?;
    let body = &value[open + 1..close];

    let mut rows = Vec::new();
    for (n, raw) in body.split([';', '\n']).enumerate() {
        let cells: Vec<&str> = raw
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        if cells.is_empty() {
            continue;
        }
        let row = cells
            .iter()
            .map(|c| c.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("mpc.{field} row {}: {e}", n + 1))?;
        if row.len() < min_cols {
            return Err(format!(
                "mpc.{field} row {} has {} columns, need at least {min_cols}",
                rows.len() + 1,
                row.len()
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_BUS: &str = "function mpc = tiny
% comment line
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	230	1	1.1	0.9;
	2	2	20	0	0	0	1	1	0	230	1	1.1	0.9;
	3	1	80	0	0	0	1	1	0	230	1	1.1	0.9;
];
mpc.gen = [
	1	60	0	100	-100	1	100	1	200	0;
	2	40	0	100	-100	1	100	1	200	0;
	2	10	0	100	-100	1	100	0	200	0;
];
mpc.branch = [
	1	2	0.01	0.1	0	250	0	0	0	0	1	-360	360;
	2	3	0.01	0.2	0	0	0	0	0	0	1	-360	360;
	1	3	0.01	0.25	0	0	0	0	0	0	0	-360	360;
];
";

    #[test]
    fn folds_generation_minus_load() {
        let case = parse(THREE_BUS, &MatpowerOptions::default()).unwrap();
        assert_eq!(case.slack_bus, 1);
        let p: Vec<f64> = case.buses.iter().map(|b| b.p_injection).collect();
        // The out-of-service unit on bus 2 is ignored.
        assert_eq!(p, vec![0.6, 0.2, -0.8]);
        assert_eq!(case.buses[1].kind, BusKind::Generator);
        assert_eq!(case.buses[2].kind, BusKind::Load);
    }

    #[test]
    fn branch_thresholds_and_status() {
        let case = parse(THREE_BUS, &MatpowerOptions { default_sigma: 1.5 }).unwrap();
        assert_eq!(case.branches[0].threshold, 2.5);
        assert_eq!(case.branches[1].threshold, 1.5);
        assert!(!case.branches[2].live);
        assert_eq!(case.branches[2].id, 3);
    }

    #[test]
    fn missing_table_is_an_error() {
        let text = THREE_BUS.replace("mpc.gen", "mpc.generators");
        assert!(parse(&text, &MatpowerOptions::default())
            .unwrap_err()
            .contains("mpc.gen"));
    }

    #[test]
    fn malformed_number_reports_table() {
        let text = THREE_BUS.replace("0.25", "0.2x5");
        assert!(parse(&text, &MatpowerOptions::default())
            .unwrap_err()
            .contains("mpc.branch"));
    }
}
