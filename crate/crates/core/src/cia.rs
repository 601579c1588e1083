//! Contingency identification: seeded multi-start JFNK on the KKT system,
//! keeping the disturbance with the lowest final-step cost, plus a brute
//! force grid sweep used as an oracle.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::{CascadeConfig, CascadeTrace};
use crate::error::{Error, Result};
use crate::grid::BranchId;
use crate::jfnk::{jfnk_solve, JfnkConfig};
use crate::kkt::{Bounds, KktProblem, KktVector};
use crate::prepared::PreparedCase;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiaConfig {
    /// Number of JFNK restarts.
    pub l_max: usize,
    pub seed: u64,
    /// Worker threads for restarts; results do not depend on it.
    pub jobs: usize,
    pub jfnk: JfnkConfig,
    pub cascade: CascadeConfig,
}

impl Default for CiaConfig {
    fn default() -> Self {
        Self {
            l_max: 10,
            seed: 0,
            jobs: 1,
            jfnk: JfnkConfig::default(),
            cascade: CascadeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub l: usize,
    pub z0: KktVector,
    /// JFNK output clamped into bounds; absent when the restart failed.
    pub delta_candidate: Option<f64>,
    pub j_candidate: Option<f64>,
    pub accepted: bool,
    pub converged: bool,
    pub newton_iterations: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub branch: BranchId,
    pub bounds: Bounds,
    pub best_delta: f64,
    pub best_cost: f64,
    /// Cost of the undisturbed baseline δ = 0 (clamped into bounds).
    pub baseline_cost: f64,
    pub restarts: Vec<RestartRecord>,
    pub trace_of_best: CascadeTrace,
}

impl IdentificationResult {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

struct Candidate {
    delta: Option<f64>,
    cost: Option<f64>,
    converged: bool,
    newton_iterations: usize,
    error: Option<String>,
}

fn run_restart(problem: &mut KktProblem, z0: &KktVector, cfg: &JfnkConfig) -> Candidate {
    let outcome = jfnk_solve(problem, &z0.to_array(), cfg).and_then(|report| {
        let delta = problem.bounds().clamp(report.z[0]);
        let cost = problem.cost(delta)?;
        Ok((report, delta, cost))
    });
    match outcome {
        Ok((report, delta, cost)) => Candidate {
            delta: Some(delta),
            cost: Some(cost),
            converged: report.converged,
            newton_iterations: report.iterations.len().saturating_sub(1),
            error: None,
        },
        Err(e) => {
            log::info!("restart from δ0 = {} failed: {e}", z0.delta);
            Candidate {
                delta: None,
                cost: None,
                converged: false,
                newton_iterations: match e {
                    Error::NoProgress { iterations, .. } => iterations,
                    _ => 0,
                },
                error: Some(e.to_string()),
            }
        }
    }
}

fn run_restarts(
    case: &PreparedCase,
    branch: BranchId,
    bounds: Bounds,
    cfg: &CiaConfig,
    starts: &[KktVector],
) -> Result<Vec<Candidate>> {
    let jobs = cfg.jobs.clamp(1, starts.len().max(1));
    if jobs == 1 {
        let mut problem = KktProblem::new(case, branch, bounds, cfg.cascade, cfg.jfnk.eps_sens)?;
        return Ok(starts
            .iter()
            .map(|z0| run_restart(&mut problem, z0, &cfg.jfnk))
            .collect());
    }
    let chunk = starts.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || -> Result<Vec<Candidate>> {
                    let mut problem = KktProblem::new(case, branch, bounds, cfg.cascade, cfg.jfnk.eps_sens)?;
                    Ok(part.iter().map(|z0| run_restart(&mut problem, z0, &cfg.jfnk)).collect())
                })
            })
            .collect();
        let mut out = Vec::with_capacity(starts.len());
        for h in handles {
            out.extend(h.join().expect("restart worker panicked")?);
        }
        Ok(out)
    })
}

/// Search `bounds` for the disturbance on `branch` minimizing the final cost.
pub fn identify(
    case: &PreparedCase,
    branch: BranchId,
    bounds: Bounds,
    cfg: &CiaConfig,
) -> Result<IdentificationResult> {
    if cfg.l_max == 0 {
        return Err(Error::Config("at least one restart is required".into()));
    }
    cfg.jfnk.validate()?;
    let mut baseline = KktProblem::new(case, branch, bounds, cfg.cascade, cfg.jfnk.eps_sens)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts: Vec<KktVector> = (0..cfg.l_max)
        .map(|_| {
            let d0 = if bounds.high > bounds.low {
                rng.gen_range(bounds.low..=bounds.high)
            } else {
                bounds.low
            };
            KktVector::initial(d0, &bounds)
        })
        .collect();

    let mut best_delta = bounds.clamp(0.0);
    let baseline_cost = baseline.cost(best_delta)?;
    let mut best_cost = baseline_cost;
    let candidates = run_restarts(case, branch, bounds, cfg, &starts)?;

    let mut restarts = Vec::with_capacity(cfg.l_max);
    for (l, (z0, c)) in starts.iter().zip(candidates).enumerate() {
        let accepted = matches!(c.cost, Some(j) if j < best_cost);
        if accepted {
            best_delta = c.delta.expect("accepted candidates carry δ");
            best_cost = c.cost.expect("accepted candidates carry J");
        }
        log::debug!(
            "restart {l}: δ0 = {:.6} -> {:?} J = {:?} accepted = {accepted}",
            z0.delta,
            c.delta,
            c.cost
        );
        restarts.push(RestartRecord {
            l,
            z0: *z0,
            delta_candidate: c.delta,
            j_candidate: c.cost,
            accepted,
            converged: c.converged,
            newton_iterations: c.newton_iterations,
            error: c.error,
        });
    }

    Ok(IdentificationResult {
        branch,
        bounds,
        best_delta,
        best_cost,
        baseline_cost,
        restarts,
        trace_of_best: baseline.trace(best_delta)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    /// Absent when the simulation failed at this point.
    pub cost: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub branch: BranchId,
    pub bounds: Bounds,
    pub points: Vec<SweepPoint>,
    /// Lowest-cost grid point; the first one on ties.
    pub argmin: Option<SweepPoint>,
}

impl SweepResult {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV `delta,J`; failed points leave J empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["delta", "J"])?;
        for p in &self.points {
            w.write_record([p.delta.to_string(), p.cost.map(|j| j.to_string()).unwrap_or_default()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `n` evenly spaced points on the bounds, both endpoints included exactly.
pub fn grid(bounds: &Bounds, n: usize) -> Vec<f64> {
    let span = bounds.high - bounds.low;
    (0..n)
        .map(|i| {
            if i + 1 == n {
                bounds.high
            } else {
                bounds.low + span * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Evaluate the final-step cost on a uniform grid of `n_grid` points.
pub fn sweep(
    case: &PreparedCase,
    branch: BranchId,
    bounds: Bounds,
    n_grid: usize,
    cascade: &CascadeConfig,
    jobs: usize,
) -> Result<SweepResult> {
    if n_grid < 2 {
        return Err(Error::Config(format!(
            "sweep needs at least 2 grid points, got {n_grid}"
        )));
    }
    // Validates the branch and config once up front.
    KktProblem::new(case, branch, bounds, *cascade, 1.0)?;
    let deltas = grid(&bounds, n_grid);
    let eval = |delta: f64| {
        let mut problem = KktProblem::new(case, branch, bounds, *cascade, 1.0).expect("validated above");
        match problem.cost(delta) {
            Ok(j) => SweepPoint {
                delta,
                cost: Some(j),
                error: None,
            },
            Err(e) => SweepPoint {
                delta,
                cost: None,
                error: Some(e.to_string()),
            },
        }
    };

    let jobs = jobs.clamp(1, n_grid);
    let points: Vec<SweepPoint> = if jobs == 1 {
        deltas.iter().map(|&d| eval(d)).collect()
    } else {
        let chunk = n_grid.div_ceil(jobs);
        std::thread::scope(|scope| {
            let handles: Vec<_> = deltas
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(|&d| eval(d)).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    };

    let argmin = points
        .iter()
        .filter(|p| p.cost.is_some())
        .fold(None::<&SweepPoint>, |best, p| match best {
            Some(b) if b.cost <= p.cost => Some(b),
            _ => Some(p),
        })
        .cloned();
    Ok(SweepResult {
        branch,
        bounds,
        points,
        argmin,
    })
}
