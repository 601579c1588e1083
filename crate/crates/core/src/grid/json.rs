//! Native JSON case schema.

use serde::{Deserialize, Serialize};

use super::{BranchRecord, BusKind, BusRecord, HvdcLinkSpec, NetworkCase, TcscParams};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct CaseFile {
    base_mva: f64,
    slack_bus: u32,
    buses: Vec<BusEntry>,
    branches: Vec<BranchEntry>,
    #[serde(default)]
    hvdc: Vec<HvdcEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusEntry {
    id: u32,
    p: f64,
    /// `generator` or `load`; inferred from the sign of `p` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<BusKind>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchEntry {
    id: u32,
    from: u32,
    to: u32,
    x: f64,
    sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tcsc: Option<TcscParams>,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    live: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HvdcEntry {
    branch: u32,
    alpha: f64,
    gamma: f64,
    rcr: f64,
    rci: f64,
    rl: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mva: Option<f64>,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

pub(super) fn parse(text: &str) -> Result<NetworkCase, String> {
    let file: CaseFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Ok(file.into())
}

impl From<CaseFile> for NetworkCase {
    fn from(f: CaseFile) -> Self {
        let slack = f.slack_bus;
        NetworkCase {
            base_mva: f.base_mva,
            slack_bus: slack,
            buses: f
                .buses
                .into_iter()
                .map(|b| BusRecord {
                    id: b.id,
                    p_injection: b.p,
                    kind: if b.id == slack {
                        BusKind::Slack
                    } else {
                        match b.kind {
                            Some(BusKind::Slack) | None if b.p > 0.0 => BusKind::Generator,
                            Some(BusKind::Slack) | None => BusKind::Load,
                            Some(k) => k,
                        }
                    },
                })
                .collect(),
            branches: f
                .branches
                .into_iter()
                .map(|b| BranchRecord {
                    id: b.id,
                    from_bus: b.from,
                    to_bus: b.to,
                    reactance: b.x,
                    threshold: b.sigma,
                    tcsc: b.tcsc,
                    live: b.live,
                })
                .collect(),
            hvdc: f
                .hvdc
                .into_iter()
                .map(|h| HvdcLinkSpec {
                    replaced_branch: h.branch,
                    alpha: h.alpha,
                    gamma: h.gamma,
                    r_cr: h.rcr,
                    r_ci: h.rci,
                    r_l: h.rl,
                    mva: h.mva,
                })
                .collect(),
        }
    }
}

impl From<&NetworkCase> for CaseFile {
    fn from(c: &NetworkCase) -> Self {
        CaseFile {
            base_mva: c.base_mva,
            slack_bus: c.slack_bus,
            buses: c
                .buses
                .iter()
                .map(|b| BusEntry {
                    id: b.id,
                    p: b.p_injection,
                    kind: match b.kind {
                        BusKind::Slack => None,
                        k => Some(k),
                    },
                })
                .collect(),
            branches: c
                .branches
                .iter()
                .map(|b| BranchEntry {
                    id: b.id,
                    from: b.from_bus,
                    to: b.to_bus,
                    x: b.reactance,
                    sigma: b.threshold,
                    tcsc: b.tcsc,
                    live: b.live,
                })
                .collect(),
            hvdc: c
                .hvdc
                .iter()
                .map(|h| HvdcEntry {
                    branch: h.replaced_branch,
                    alpha: h.alpha,
                    gamma: h.gamma,
                    rcr: h.r_cr,
                    rci: h.r_ci,
                    rl: h.r_l,
                    mva: h.mva,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_kind_overrides_sign_inference() {
        let text = r#"{"base_mva": 100, "slack_bus": 1,
            "buses": [{"id": 1, "p": 0}, {"id": 2, "p": -0.5, "kind": "generator"}, {"id": 3, "p": 0.2}],
            "branches": []}"#;
        let case = parse(text).unwrap();
        assert_eq!(case.buses[1].kind, BusKind::Generator);
        assert_eq!(case.buses[2].kind, BusKind::Generator);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"base_mva": 100, "slack_bus": 1, "buses": [], "branches": [], "extra": 1}"#;
        assert!(parse(text).unwrap_err().contains("extra"));
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let text = r#"{"base_mva": 100, "slack_bus": 2,
            "buses": [{"id": 1, "p": -0.5}, {"id": 2, "p": 0.25}, {"id": 3, "p": 0.0, "kind": "generator"}],
            "branches": [
                {"id": 1, "from": 1, "to": 2, "x": 0.1, "sigma": 1.5,
                 "tcsc": {"tc": 2, "xref": 0, "xmin": 0, "xmax": 10, "kp": 4, "ki": 3, "kd": 2}},
                {"id": 2, "from": 2, "to": 3, "x": 0.2, "sigma": 1, "live": false}
            ],
            "hvdc": [{"branch": 2, "alpha": 0.2, "gamma": 0.7, "rcr": 0.1, "rci": 0.1, "rl": 0.1, "mva": 10}]}"#;
        let case = parse(text).unwrap();
        let again = parse(&serde_json::to_string(&CaseFile::from(&case)).unwrap()).unwrap();
        assert_eq!(case, again);
    }
}
