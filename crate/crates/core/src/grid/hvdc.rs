//! HVDC links reduced to constant bus injections.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{HvdcLinkSpec, NetworkCase};
use crate::error::{Error, Result};

const ALPHA_RANGE: (f64, f64) = (PI / 30.0, PI / 2.0);
const GAMMA_RANGE: (f64, f64) = (PI / 12.0, PI / 9.0);

/// Direct current I_d from rectifier to inverter, per-unit on the link base.
pub fn hvdc_direct_current(link: &HvdcLinkSpec) -> Result<f64> {
    let denom = link.r_cr + link.r_l - link.r_ci;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateLink {
            branch: link.replaced_branch,
            denominator: denom,
        });
    }
    Ok(3.0 * 3f64.sqrt() * (link.alpha.cos() - link.gamma.cos()) / (PI * denom))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HvdcTerminalPowers {
    pub i_d: f64,
    /// Power consumed at the rectifier bus.
    pub p_r: f64,
    /// Power delivered at the inverter bus.
    pub p_i: f64,
}

impl HvdcLinkSpec {
    /// Terminal powers in link per-unit.
    pub fn terminal_powers(&self) -> Result<HvdcTerminalPowers> {
        let i_d = hvdc_direct_current(self)?;
        let k = 3.0 * 3f64.sqrt() / PI;
        let p_r = k * i_d * self.alpha.cos() - self.r_cr * i_d * i_d;
        let p_i = p_r - self.r_l * i_d * i_d;
        Ok(HvdcTerminalPowers { i_d, p_r, p_i })
    }

    /// Multiplier converting link per-unit power to the system base.
    pub fn power_scale(&self, system_base_mva: f64) -> f64 {
        self.mva.map_or(1.0, |mva| mva / system_base_mva)
    }

    fn warn_if_out_of_range(&self) {
        if !(ALPHA_RANGE.0..=ALPHA_RANGE.1).contains(&self.alpha) {
            log::warn!(
                "HVDC link on branch {}: alpha = {:.4} rad outside nominal [pi/30, pi/2]",
                self.replaced_branch,
                self.alpha
            );
        }
        if !(GAMMA_RANGE.0..=GAMMA_RANGE.1).contains(&self.gamma) {
            log::warn!(
                "HVDC link on branch {}: gamma = {:.4} rad outside nominal [pi/12, pi/9]",
                self.replaced_branch,
                self.gamma
            );
        }
    }
}

/// Remove each HVDC-replaced branch from the AC topology and fold the
/// rectifier load and inverter generation into the terminal bus injections.
///
/// The returned case has an empty `hvdc` list, so applying twice is a no-op.
pub fn apply_hvdc(case: &NetworkCase) -> Result<NetworkCase> {
    let mut out = case.clone();
    out.hvdc.clear();
    for link in &case.hvdc {
        link.warn_if_out_of_range();
        let powers = link.terminal_powers()?;
        let scale = link.power_scale(case.base_mva);
        let branch = out
            .branch_mut(link.replaced_branch)
            .ok_or(Error::UnknownBranch(link.replaced_branch))?;
        branch.live = false;
        let (rectifier, inverter) = (branch.from_bus, branch.to_bus);
        for bus in out.buses.iter_mut() {
            if bus.id == rectifier {
                bus.p_injection -= powers.p_r * scale;
            }
            if bus.id == inverter {
                bus.p_injection += powers.p_i * scale;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BranchRecord, BusKind, BusRecord};

    fn link(alpha: f64, gamma: f64, r: (f64, f64, f64)) -> HvdcLinkSpec {
        HvdcLinkSpec {
            replaced_branch: 1,
            alpha,
            gamma,
            r_cr: r.0,
            r_ci: r.1,
            r_l: r.2,
            mva: None,
        }
    }

    #[test]
    fn equal_angles_carry_no_current() {
        let l = link(0.4, 0.4, (0.1, 0.1, 0.1));
        assert_eq!(hvdc_direct_current(&l).unwrap(), 0.0);
        let p = l.terminal_powers().unwrap();
        assert_eq!((p.p_r, p.p_i), (0.0, 0.0));
    }

    #[test]
    fn doubling_denominator_halves_current() {
        let a = hvdc_direct_current(&link(PI / 15.0, PI / 4.0, (0.1, 0.1, 0.1))).unwrap();
        let b = hvdc_direct_current(&link(PI / 15.0, PI / 4.0, (0.2, 0.1, 0.1))).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-12);
    }

    #[test]
    fn zero_denominator_is_degenerate() {
        let err = hvdc_direct_current(&link(0.2, 0.7, (0.1, 0.2, 0.1))).unwrap_err();
        assert!(matches!(err, Error::DegenerateLink { branch: 1, .. }));
    }

    #[test]
    fn swapping_angles_flips_current() {
        let a = hvdc_direct_current(&link(0.3, 0.9, (0.1, 0.05, 0.2))).unwrap();
        let b = hvdc_direct_current(&link(0.9, 0.3, (0.1, 0.05, 0.2))).unwrap();
        assert_eq!(a, -b);
    }

    fn two_bus_with_link(mva: Option<f64>) -> NetworkCase {
        NetworkCase {
            base_mva: 100.0,
            slack_bus: 1,
            buses: vec![
                BusRecord {
                    id: 1,
                    p_injection: 1.0,
                    kind: BusKind::Slack,
                },
                BusRecord {
                    id: 2,
                    p_injection: -1.0,
                    kind: BusKind::Load,
                },
            ],
            branches: vec![
                BranchRecord {
                    id: 1,
                    from_bus: 1,
                    to_bus: 2,
                    reactance: 0.1,
                    threshold: 5.0,
                    tcsc: None,
                    live: true,
                },
                BranchRecord {
                    id: 2,
                    from_bus: 1,
                    to_bus: 2,
                    reactance: 0.1,
                    threshold: 5.0,
                    tcsc: None,
                    live: true,
                },
            ],
            hvdc: vec![HvdcLinkSpec {
                replaced_branch: 2,
                mva,
                ..link(PI / 15.0, PI / 4.0, (0.1, 0.1, 0.1))
            }],
        }
    }

    #[test]
    fn apply_removes_branch_and_is_idempotent() {
        let case = two_bus_with_link(None);
        let once = apply_hvdc(&case).unwrap();
        assert!(!once.branch(2).unwrap().live);
        assert!(once.hvdc.is_empty());
        assert_eq!(apply_hvdc(&once).unwrap(), once);
    }

    #[test]
    fn converter_base_scales_injections() {
        let full = apply_hvdc(&two_bus_with_link(None)).unwrap();
        let tenth = apply_hvdc(&two_bus_with_link(Some(10.0))).unwrap();
        let d_full = full.bus(1).unwrap().p_injection - 1.0;
        let d_tenth = tenth.bus(1).unwrap().p_injection - 1.0;
        assert!((d_full - 10.0 * d_tenth).abs() < 1e-12);
    }
}
