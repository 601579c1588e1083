//! The IEEE 118-bus test system with the relay thresholds, TCSC devices and
//! HVDC links used throughout the examples.
//!
//! [`build_ieee118`] derives the bundled JSON from the MATPOWER source; the
//! bundled copy is what [`ieee118`] loads.

use crate::error::Result;
use crate::grid::{BranchId, HvdcLinkSpec, MatpowerOptions, NetworkCase, TcscParams};

pub const CASE118_M: &str = include_str!("../data/case118.m");
pub const IEEE118_JSON: &str = include_str!("../data/ieee118.json");

/// Branch whose susceptance the contingency search perturbs.
pub const DISTURBED_BRANCH: BranchId = 8;
/// Search interval for δ on [`DISTURBED_BRANCH`].
pub const DELTA_BOUNDS: (f64, f64) = (0.0, 37.45);

/// Branches replaced by HVDC links.
pub const HVDC_BRANCHES: [BranchId; 3] = [4, 16, 38];

/// Relay thresholds in per-unit; every other branch has σ = 1.
pub const THRESHOLDS: [(f64, &[BranchId]); 6] = [
    (7.0, &[32]),
    (6.0, &[18, 31]),
    (5.0, &[7, 8, 9]),
    (4.0, &[1, 12, 13, 14, 21, 33, 36, 37, 96]),
    (3.0, &[11, 15, 41, 51, 141]),
    (
        2.0,
        &[
            2, 3, 5, 6, 10, 17, 19, 20, 22, 23, 25, 26, 27, 28, 29, 30, 34, 39, 42, 43, 54, 62, 90, 93, 94, 97, 98, 99,
            104, 105, 106, 107, 108, 126, 127, 137, 139, 163, 178, 179, 183,
        ],
    ),
];

pub const TCSC: TcscParams = TcscParams {
    tc: 50.0,
    xref: 0.0,
    xmin: 0.0,
    xmax: 10.0,
    kp: 4.0,
    ki: 3.0,
    kd: 2.0,
};

pub fn hvdc_link(branch: BranchId) -> HvdcLinkSpec {
    HvdcLinkSpec {
        replaced_branch: branch,
        alpha: std::f64::consts::PI / 15.0,
        gamma: std::f64::consts::PI / 4.0,
        r_cr: 0.1,
        r_ci: 0.1,
        r_l: 0.1,
        mva: Some(10.0),
    }
}

/// Build the study case from MATPOWER `case118` text.
pub fn build_ieee118(matpower: &str) -> Result<NetworkCase> {
    let mut case = NetworkCase::from_matpower_str(matpower, &MatpowerOptions { default_sigma: 1.0 })?;
    for branch in &mut case.branches {
        branch.threshold = 1.0;
        branch.tcsc = Some(TCSC);
    }
    for (sigma, ids) in THRESHOLDS {
        case.set_thresholds(sigma, ids)?;
    }
    // The printed reactance 0.0267 is 1/37.45 rounded; keep the exact value
    // so that δ at the upper bound severs the branch.
    if let Some(b) = case.branch_mut(DISTURBED_BRANCH) {
        b.reactance = 1.0 / DELTA_BOUNDS.1;
    }
    case.hvdc = HVDC_BRANCHES.iter().map(|&b| hvdc_link(b)).collect();
    case.validate()?;
    Ok(case)
}

/// The bundled study case.
pub fn ieee118() -> NetworkCase {
    NetworkCase::from_json_str(IEEE118_JSON).expect("bundled ieee118.json is valid")
}
