//! Static network description: buses, branches, TCSC parameters and HVDC links.
//!
//! A [`NetworkCase`] is immutable once validated and may be shared freely
//! between concurrent simulations.

mod hvdc;
mod incidence;
mod json;
mod matpower;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hvdc::{apply_hvdc, hvdc_direct_current, HvdcTerminalPowers};
pub use incidence::{build_incidence, IncidenceMatrix};
pub use matpower::MatpowerOptions;

pub type BusId = u32;
pub type BranchId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Generator,
    Load,
    Slack,
}

impl BusKind {
    /// Slack buses count as generation for island bookkeeping.
    pub fn has_generation(self) -> bool {
        matches!(self, BusKind::Generator | BusKind::Slack)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BusRecord {
    pub id: BusId,
    /// Net injection in per-unit, positive for net generation.
    pub p_injection: f64,
    pub kind: BusKind,
}

/// First-order TCSC model parameters and the PID gains driving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcscParams {
    /// Time constant T_C in seconds.
    pub tc: f64,
    pub xref: f64,
    pub xmin: f64,
    pub xmax: f64,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub id: BranchId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    /// Line reactance X_i in per-unit.
    pub reactance: f64,
    /// Power-flow threshold σ_i in per-unit. Also the TCSC reference power.
    pub threshold: f64,
    pub tcsc: Option<TcscParams>,
    pub live: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvdcLinkSpec {
    /// AC branch replaced by the link. Rectifier sits at its from-bus,
    /// inverter at its to-bus.
    pub replaced_branch: BranchId,
    /// Ignition delay angle of the rectifier, radians.
    pub alpha: f64,
    /// Extinction advance angle of the inverter, radians.
    pub gamma: f64,
    pub r_cr: f64,
    pub r_ci: f64,
    pub r_l: f64,
    /// Converter power base in MVA. Link quantities are per-unit on this
    /// base; `None` means the system base.
    pub mva: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkCase {
    pub base_mva: f64,
    pub slack_bus: BusId,
    pub buses: Vec<BusRecord>,
    pub branches: Vec<BranchRecord>,
    pub hvdc: Vec<HvdcLinkSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseFormat {
    NativeJson,
    MatpowerM,
}

impl CaseFormat {
    /// Guess the format from a file extension (`.m` is MATPOWER, anything else JSON).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("m") => CaseFormat::MatpowerM,
            _ => CaseFormat::NativeJson,
        }
    }
}

/// Read and validate a case file.
pub fn load_case(path: impl AsRef<Path>, format: CaseFormat) -> Result<NetworkCase> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let case = match format {
        CaseFormat::NativeJson => json::parse(&text).map_err(|e| Error::parse(path, e))?,
        CaseFormat::MatpowerM => {
            matpower::parse(&text, &MatpowerOptions::default()).map_err(|e| Error::parse(path, e))?
        }
    };
    case.validate()?;
    Ok(case)
}

impl NetworkCase {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let case = json::parse(text).map_err(|e| Error::parse("<string>", e))?;
        case.validate()?;
        Ok(case)
    }

    pub fn from_matpower_str(text: &str, options: &MatpowerOptions) -> Result<Self> {
        let case = matpower::parse(text, options).map_err(|e| Error::parse("<string>", e))?;
        case.validate()?;
        Ok(case)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&json::CaseFile::from(self))?)
    }

    /// Check every invariant and report all violations together.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();

        if !(self.base_mva > 0.0) {
            problems.push(format!("base_mva must be positive, got {}", self.base_mva));
        }

        let mut bus_ids = BTreeSet::new();
        let mut slack_count = 0;
        for bus in &self.buses {
            if !bus_ids.insert(bus.id) {
                problems.push(format!("duplicate bus id {}", bus.id));
            }
            if !bus.p_injection.is_finite() {
                problems.push(format!("bus {} has non-finite injection", bus.id));
            }
            if bus.kind == BusKind::Slack {
                slack_count += 1;
                if bus.id != self.slack_bus {
                    problems.push(format!(
                        "bus {} is marked slack but slack_bus is {}",
                        bus.id, self.slack_bus
                    ));
                }
            }
        }
        if !bus_ids.contains(&self.slack_bus) {
            problems.push(format!("slack bus {} does not exist", self.slack_bus));
        }
        if slack_count != 1 {
            problems.push(format!("expected exactly one slack bus, found {slack_count}"));
        }

        let mut branch_ids = BTreeSet::new();
        for br in &self.branches {
            if !branch_ids.insert(br.id) {
                problems.push(format!("duplicate branch id {}", br.id));
            }
            for end in [br.from_bus, br.to_bus] {
                if !bus_ids.contains(&end) {
                    problems.push(format!("branch {} references missing bus {}", br.id, end));
                }
            }
            if br.from_bus == br.to_bus {
                problems.push(format!("branch {} is a self-loop on bus {}", br.id, br.from_bus));
            }
            if !(br.reactance > 0.0 && br.reactance.is_finite()) {
                problems.push(format!(
                    "branch {} reactance must be positive, got {}",
                    br.id, br.reactance
                ));
            }
            if !(br.threshold > 0.0 && br.threshold.is_finite()) {
                problems.push(format!(
                    "branch {} threshold must be positive, got {}",
                    br.id, br.threshold
                ));
            }
            if let Some(t) = &br.tcsc {
                if !(t.tc > 0.0) {
                    problems.push(format!("branch {} TCSC time constant must be positive", br.id));
                }
                if !(t.xmin <= t.xref && t.xref <= t.xmax) {
                    problems.push(format!(
                        "branch {} TCSC requires xmin <= xref <= xmax, got {} <= {} <= {}",
                        br.id, t.xmin, t.xref, t.xmax
                    ));
                }
                if ![t.kp, t.ki, t.kd].iter().all(|g| g.is_finite()) {
                    problems.push(format!("branch {} TCSC gains must be finite", br.id));
                }
            }
        }

        let mut replaced = BTreeSet::new();
        for link in &self.hvdc {
            if !branch_ids.contains(&link.replaced_branch) {
                problems.push(format!("HVDC link references missing branch {}", link.replaced_branch));
            }
            if !replaced.insert(link.replaced_branch) {
                problems.push(format!(
                    "branch {} is replaced by more than one HVDC link",
                    link.replaced_branch
                ));
            }
            let denom = link.r_cr + link.r_l - link.r_ci;
            if !(denom > 0.0) {
                problems.push(format!(
                    "HVDC link on branch {} needs R_cr + R_L - R_ci > 0, got {}",
                    link.replaced_branch, denom
                ));
            }
            if [link.r_cr, link.r_ci, link.r_l].iter().any(|r| *r < 0.0) {
                problems.push(format!(
                    "HVDC link on branch {} has a negative resistance",
                    link.replaced_branch
                ));
            }
            if let Some(mva) = link.mva {
                if !(mva > 0.0) {
                    problems.push(format!(
                        "HVDC link on branch {} has non-positive converter base {}",
                        link.replaced_branch, mva
                    ));
                }
            }
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn bus(&self, id: BusId) -> Option<&BusRecord> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn branch(&self, id: BranchId) -> Option<&BranchRecord> {
        self.branches.iter().find(|b| b.id == id)
    }

    pub fn branch_mut(&mut self, id: BranchId) -> Option<&mut BranchRecord> {
        self.branches.iter_mut().find(|b| b.id == id)
    }

    /// Buses sorted by id, the column order used everywhere downstream.
    pub fn sorted_buses(&self) -> Vec<&BusRecord> {
        let mut v: Vec<_> = self.buses.iter().collect();
        v.sort_by_key(|b| b.id);
        v
    }

    /// Branches sorted by id, the row order used everywhere downstream.
    pub fn sorted_branches(&self) -> Vec<&BranchRecord> {
        let mut v: Vec<_> = self.branches.iter().collect();
        v.sort_by_key(|b| b.id);
        v
    }

    /// Position of each branch id in [`NetworkCase::sorted_branches`].
    pub fn branch_index(&self) -> BTreeMap<BranchId, usize> {
        self.sorted_branches()
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id, i))
            .collect()
    }

    pub fn live_branch_count(&self) -> usize {
        self.branches.iter().filter(|b| b.live).count()
    }

    pub fn total_injection(&self) -> f64 {
        self.buses.iter().map(|b| b.p_injection).sum()
    }

    /// Overwrite thresholds for the listed branches.
    pub fn set_thresholds(&mut self, sigma: f64, branches: &[BranchId]) -> Result<()> {
        for &id in branches {
            self.branch_mut(id).ok_or(Error::UnknownBranch(id))?.threshold = sigma;
        }
        Ok(())
    }
}
