//! TCSC reactance dynamics under PID regulation.
//!
//! Between two relay epochs every live TCSC integrates
//! `T_C dX_C/dt = −X_C + X_ref + u` with explicit Euler, clamped to
//! `[X_min, X_max]`. The supplementary input comes from a PID on the
//! overload error, with the integral frozen while the reactance is clamped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TcscParams;
use crate::powerflow::SusceptanceVector;
use crate::prepared::PreparedCase;

pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcscState {
    pub x_c: f64,
    pub integral: f64,
    pub prev_error: f64,
}

impl TcscState {
    /// Steady pre-contingency state: X_C = X_ref, controller at rest.
    pub fn at_reference(params: &TcscParams) -> Self {
        Self {
            x_c: params.xref,
            integral: 0.0,
            prev_error: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidOutput {
    pub u: f64,
    /// Integral accumulator including this substep; committed by
    /// [`step_tcsc`] unless the reactance saturates.
    pub integral: f64,
    pub error: f64,
}

/// `P_ref − |P_e|` once the flow reaches the reference, else 0.
pub fn error_signal(p_e: f64, p_ref: f64) -> f64 {
    if p_e.abs() >= p_ref {
        p_ref - p_e.abs()
    } else {
        0.0
    }
}

/// Rectangle-rule integral, backward-difference derivative of the error.
pub fn pid_control(e: f64, state: &TcscState, params: &TcscParams, dt: f64) -> PidOutput {
    let integral = state.integral + e * dt;
    let derivative = (e - state.prev_error) / dt;
    PidOutput {
        u: params.kp * e + params.ki * integral + params.kd * derivative,
        integral,
        error: e,
    }
}

/// One explicit-Euler step of the TCSC model driven by input `u`.
pub fn step_tcsc(state: &TcscState, u: f64, pid: &PidOutput, params: &TcscParams, dt: f64) -> TcscState {
    let raw = state.x_c + dt / params.tc * (-state.x_c + params.xref + u);
    let x_c = raw.clamp(params.xmin, params.xmax);
    let saturated = x_c != raw;
    TcscState {
        x_c,
        integral: if saturated { state.integral } else { pid.integral },
        prev_error: pid.error,
    }
}

/// Result of one FACTS horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct FactsUpdate {
    pub susceptance: SusceptanceVector,
    pub states: Vec<Option<TcscState>>,
    pub substeps: usize,
}

/// Integrate every live TCSC over `horizon` seconds in substeps of `dt`.
///
/// `line_reactance` is the per-branch reactance excluding the TCSC
/// contribution (it already carries any disturbance). Severed branches and
/// branches without a device keep their susceptance untouched.
pub fn facts_update(
    case: &PreparedCase,
    b: &SusceptanceVector,
    line_reactance: &[f64],
    states: &[Option<TcscState>],
    horizon: f64,
    dt: f64,
) -> Result<FactsUpdate> {
    if !(dt > 0.0 && horizon > 0.0 && dt <= horizon) {
        return Err(Error::Config(format!(
            "FACTS integration needs 0 < dt <= horizon, got dt = {dt}, horizon = {horizon}"
        )));
    }
    let mut b = b.clone();
    let mut states = states.to_vec();
    let active: Vec<usize> = (0..b.len())
        .filter(|&i| b[i] != 0.0 && case.tcsc[i].is_some() && states[i].is_some())
        .collect();
    if active.is_empty() {
        return Ok(FactsUpdate {
            susceptance: b,
            states,
            substeps: 0,
        });
    }

    // Topology is fixed over the horizon.
    let partition = case.partition(&b);
    let substeps = ((horizon / dt).round() as usize).max(1);
    let mut flows = None;
    let mut changed = true;

    for _ in 0..substeps {
        if changed {
            flows = Some(case.solve(&b, &partition)?.1);
        }
        let p_e = flows.as_ref().expect("flows solved on first substep");
        changed = false;
        for &i in &active {
            let params = case.tcsc[i].as_ref().expect("active branches carry TCSC");
            let state = states[i].as_mut().expect("active branches carry state");
            let e = error_signal(p_e[i], case.threshold[i]);
            let pid = pid_control(e, state, params, dt);
            // An overload gives e < 0; the device must add series reactance
            // to push flow away, so the PID output enters with reversed sign.
            let next = step_tcsc(state, -pid.u, &pid, params, dt);
            if next.x_c != state.x_c {
                changed = true;
                b.0[i] = -1.0 / (next.x_c + line_reactance[i]);
            }
            *state = next;
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("TCSC susceptance"));
        }
    }

    Ok(FactsUpdate {
        susceptance: b,
        states,
        substeps,
    })
}
