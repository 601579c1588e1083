//! Cascading-step loop: disturbance, FACTS adjustment, relay tripping.
//!
//! Step 1 applies the disturbance. Each later step advances one relay
//! period T: the TCSCs integrate over the period, relays compare the
//! post-adjustment flows against their thresholds, and every branch whose
//! timer has run past T is severed in the same step. Step k is stamped
//! at time k·T.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facts::{facts_update, TcscState, DEFAULT_DT};
use crate::grid::BranchId;
use crate::powerflow::{FlowVector, IslandPartition, SusceptanceVector};
use crate::prepared::PreparedCase;

/// A disturbed susceptance whose magnitude falls below this is an outage.
pub const OUTAGE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    /// Maximum number of cascading steps m.
    pub max_steps: usize,
    /// Relay preset time T in seconds; also the length of one step.
    pub relay_period: f64,
    /// TCSC integration substep in seconds.
    pub dt: f64,
    pub facts_enabled: bool,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            max_steps: 12,
            relay_period: 1.0,
            dt: DEFAULT_DT,
            facts_enabled: false,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_steps >= 1
            && self.relay_period > 0.0
            && self.dt > 0.0
            && self.dt <= self.relay_period
            && self.relay_period.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "cascade config needs m >= 1 and 0 < dt <= T, got {self:?}"
            )))
        }
    }
}

/// Per-branch overload timers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayTimers {
    pub counting: Vec<f64>,
    pub preset: f64,
}

impl RelayTimers {
    pub fn new(n_branch: usize, preset: f64) -> Self {
        Self {
            counting: vec![0.0; n_branch],
            preset,
        }
    }
}

/// Advance every live relay by `elapsed` seconds and return the gate vector
/// G (true = keep, false = trip).
///
/// A relay accumulates time while its branch is overloaded and resets as
/// soon as the overload clears. It trips only when overloaded with the
/// counter strictly past the preset.
pub fn relay_gate(
    flows: &[f64],
    thresholds: &[f64],
    live: &[bool],
    timers: &mut RelayTimers,
    elapsed: f64,
) -> Vec<bool> {
    let preset = timers.preset;
    flows
        .iter()
        .zip(thresholds)
        .zip(live)
        .zip(timers.counting.iter_mut())
        .map(|(((p, sigma), &on), t_c)| {
            if !on {
                *t_c = 0.0;
                return true;
            }
            let overloaded = p.abs() > *sigma;
            if overloaded {
                *t_c += elapsed;
            } else {
                *t_c = 0.0;
            }
            !(overloaded && *t_c > preset)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    pub branch: BranchId,
    /// Additive susceptance change δ on the disturbed branch.
    pub delta: f64,
}

/// B¹ = B⁰ + δ on the disturbed coordinate; a result within
/// [`OUTAGE_EPS`] of zero is snapped to an outage.
pub fn apply_disturbance(case: &PreparedCase, b0: &SusceptanceVector, d: &Disturbance) -> Result<SusceptanceVector> {
    let row = case.branch_row(d.branch)?;
    if b0[row] == 0.0 {
        return Err(Error::DisturbedBranchSevered(d.branch));
    }
    let mut b = b0.clone();
    b.0[row] += d.delta;
    if b.0[row].abs() < OUTAGE_EPS {
        b.0[row] = 0.0;
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IslandSummary {
    pub count: usize,
    pub isolated_buses: usize,
    pub largest: usize,
}

impl From<&IslandPartition> for IslandSummary {
    fn from(p: &IslandPartition) -> Self {
        Self {
            count: p.len(),
            isolated_buses: p.isolated_bus_count(),
            largest: p.islands.iter().map(|i| i.buses.len()).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeStep {
    pub k: usize,
    pub time: f64,
    pub susceptance: SusceptanceVector,
    pub flows: FlowVector,
    pub tripped: Vec<BranchId>,
    /// Branches severed so far, counted against the pre-disturbance topology.
    pub branches_out: usize,
    pub islands: IslandSummary,
    /// ½‖P_e^k‖² at this step.
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    NoOverloads,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeTrace {
    pub disturbance: Disturbance,
    pub config: CascadeConfig,
    pub steps: Vec<CascadeStep>,
    pub final_cost: f64,
    pub terminated_reason: TerminationReason,
}

impl CascadeTrace {
    pub fn final_step(&self) -> &CascadeStep {
        self.steps.last().expect("a trace always holds step 1")
    }

    pub fn final_flows(&self) -> &FlowVector {
        &self.final_step().flows
    }

    pub fn outage_count(&self) -> usize {
        self.final_step().branches_out
    }

    pub fn island_count(&self) -> usize {
        self.final_step().islands.count
    }

    /// Time of the last topology change, or 0 when nothing tripped.
    pub fn end_time(&self) -> f64 {
        self.steps
            .iter()
            .rev()
            .find(|s| !s.tripped.is_empty())
            .map_or(0.0, |s| s.time)
    }

    /// Every branch tripped during the cascade, in trip order.
    pub fn tripped_branches(&self) -> Vec<BranchId> {
        self.steps.iter().flat_map(|s| s.tripped.iter().copied()).collect()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV timeline `step,time_s,branches_out_cumulative,islands,J_partial`.
    pub fn write_timeline_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "time_s", "branches_out_cumulative", "islands", "J_partial"])?;
        for s in &self.steps {
            w.write_record([
                s.k.to_string(),
                s.time.to_string(),
                s.branches_out.to_string(),
                s.islands.count.to_string(),
                s.cost.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// J = ½‖P_e^m‖² at the final recorded step.
pub fn cost(trace: &CascadeTrace) -> f64 {
    trace.final_flows().half_square_norm()
}

struct Cascade<'a> {
    case: &'a PreparedCase,
    cfg: &'a CascadeConfig,
    line_reactance: Vec<f64>,
    tcsc: Vec<Option<TcscState>>,
    b: SusceptanceVector,
    partition: IslandPartition,
    flows: FlowVector,
    timers: RelayTimers,
}

impl<'a> Cascade<'a> {
    fn record(&self, k: usize, tripped: Vec<BranchId>) -> CascadeStep {
        let out = self
            .case
            .live
            .iter()
            .zip(self.b.iter())
            .filter(|(&was, &now)| was && now == 0.0)
            .count();
        CascadeStep {
            k,
            time: k as f64 * self.cfg.relay_period,
            susceptance: self.b.clone(),
            flows: self.flows.clone(),
            tripped,
            branches_out: out,
            islands: IslandSummary::from(&self.partition),
            cost: self.flows.half_square_norm(),
        }
    }

    fn any_overload(&self) -> bool {
        self.case.overloaded(&self.b, &self.flows).into_iter().any(|o| o)
    }

    fn step(&mut self, k: usize) -> Result<CascadeStep> {
        if self.cfg.facts_enabled {
            let update = facts_update(
                self.case,
                &self.b,
                &self.line_reactance,
                &self.tcsc,
                self.cfg.relay_period,
                self.cfg.dt,
            )?;
            if update.substeps > 0 {
                self.b = update.susceptance;
                self.tcsc = update.states;
                self.flows = self.case.solve(&self.b, &self.partition)?.1;
            }
        }

        let live = self.b.live_flags();
        let gate = relay_gate(
            &self.flows,
            &self.case.threshold,
            &live,
            &mut self.timers,
            self.cfg.relay_period,
        );
        let mut tripped = Vec::new();
        for (i, keep) in gate.into_iter().enumerate() {
            if !keep {
                self.b.0[i] = 0.0;
                self.tcsc[i] = None;
                self.timers.counting[i] = 0.0;
                tripped.push(self.case.incidence.branch_ids()[i]);
            }
        }
        if !tripped.is_empty() {
            self.partition = self.case.partition(&self.b);
            self.flows = self.case.solve(&self.b, &self.partition)?.1;
        }
        Ok(self.record(k, tripped))
    }
}

/// Run the cascade triggered by `d` on a prepared case.
pub fn simulate_cascade(case: &PreparedCase, d: &Disturbance, cfg: &CascadeConfig) -> Result<CascadeTrace> {
    cfg.validate()?;
    let row = case.branch_row(d.branch)?;

    let tcsc: Vec<Option<TcscState>> = case
        .tcsc
        .iter()
        .zip(&case.live)
        .map(|(p, &on)| match p {
            Some(p) if cfg.facts_enabled && on => Some(TcscState::at_reference(p)),
            _ => None,
        })
        .collect();
    let total_reactance: Vec<f64> = case
        .reactance
        .iter()
        .zip(&tcsc)
        .map(|(x, s)| x + s.map_or(0.0, |s| s.x_c))
        .collect();
    let b0 = SusceptanceVector::from_reactances(&total_reactance, &case.live);
    let b1 = apply_disturbance(case, &b0, d)?;

    // The disturbance is carried as a modified line reactance so the TCSC
    // can keep rebuilding B = −1/(X_C + X) on that branch.
    let mut line_reactance = case.reactance.clone();
    let mut tcsc = tcsc;
    if b1[row] == 0.0 {
        tcsc[row] = None;
    } else {
        line_reactance[row] = -1.0 / b1[row] - tcsc[row].map_or(0.0, |s| s.x_c);
    }

    let partition = case.partition(&b1);
    let flows = case.solve(&b1, &partition).map_err(|e| e.at_step(1))?.1;
    let mut sim = Cascade {
        case,
        cfg,
        line_reactance,
        tcsc,
        b: b1,
        partition,
        flows,
        timers: RelayTimers::new(case.n_branch(), cfg.relay_period),
    };

    let initially_out = if sim.b[row] == 0.0 { vec![d.branch] } else { Vec::new() };
    let mut steps = vec![sim.record(1, initially_out)];
    let mut reason = TerminationReason::MaxSteps;
    for k in 2..=cfg.max_steps {
        if !sim.any_overload() {
            break;
        }
        steps.push(sim.step(k).map_err(|e| e.at_step(k))?);
    }
    if !sim.any_overload() {
        reason = TerminationReason::NoOverloads;
    }

    let final_cost = sim.flows.half_square_norm();
    Ok(CascadeTrace {
        disturbance: *d,
        config: *cfg,
        steps,
        final_cost,
        terminated_reason: reason,
    })
}
