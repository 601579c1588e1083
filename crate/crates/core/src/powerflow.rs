//! DC power flow over possibly islanded topologies.
//!
//! Each island is solved on its own: the reference bus angle is pinned to
//! zero, the island's injections are rebalanced through the reference bus
//! (or zeroed when the island has no generation), and the reduced weighted
//! Laplacian is factored directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_incidence, BranchId, BusId, BusKind, IncidenceMatrix, NetworkCase};
use crate::linalg::SymmetricSolver;

/// Relative residual above which an island solve is declared singular.
pub const SINGULAR_RESIDUAL: f64 = 1e-8;

/// Branch susceptances B_i = −1/(X_C,i + X_i); exactly 0 for severed branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SusceptanceVector(pub Vec<f64>);

impl SusceptanceVector {
    pub fn from_reactances(total_reactance: &[f64], live: &[bool]) -> Self {
        Self(
            total_reactance
                .iter()
                .zip(live)
                .map(|(&x, &on)| if on { -1.0 / x } else { 0.0 })
                .collect(),
        )
    }

    pub fn live_flags(&self) -> Vec<bool> {
        self.0.iter().map(|&b| b != 0.0).collect()
    }
}

impl std::ops::Deref for SusceptanceVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Per-branch power P_e in per-unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowVector(pub Vec<f64>);

impl FlowVector {
    /// ½‖P_e‖².
    pub fn half_square_norm(&self) -> f64 {
        0.5 * self.0.iter().map(|p| p * p).sum::<f64>()
    }
}

impl std::ops::Deref for FlowVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Island {
    pub buses: Vec<BusId>,
    pub branches: Vec<BranchId>,
    pub has_generation: bool,
    pub reference_bus: BusId,
    #[serde(skip)]
    bus_cols: Vec<usize>,
    #[serde(skip)]
    branch_rows: Vec<usize>,
    #[serde(skip)]
    reference_col: usize,
}

impl Island {
    pub fn bus_columns(&self) -> &[usize] {
        &self.bus_cols
    }

    pub fn branch_rows(&self) -> &[usize] {
        &self.branch_rows
    }

    pub fn is_isolated_bus(&self) -> bool {
        self.buses.len() == 1
    }
}

/// Connected components of the live-branch graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IslandPartition {
    pub islands: Vec<Island>,
}

impl IslandPartition {
    pub fn len(&self) -> usize {
        self.islands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.islands.is_empty()
    }

    pub fn isolated_bus_count(&self) -> usize {
        self.islands.iter().filter(|i| i.is_isolated_bus()).count()
    }
}

/// Islands of `case` given per-branch live flags (ascending branch id order).
pub fn island_decomposition(case: &NetworkCase, live: &[bool]) -> IslandPartition {
    let a = build_incidence(case);
    let kinds: Vec<BusKind> = case.sorted_buses().iter().map(|b| b.kind).collect();
    partition_islands(&a, &kinds, live)
}

/// Island decomposition on a prebuilt incidence matrix.
///
/// `kinds` is indexed by bus column. Islands are listed in order of their
/// lowest bus column; within an island buses and branches are ascending.
pub fn partition_islands(a: &IncidenceMatrix, kinds: &[BusKind], live: &[bool]) -> IslandPartition {
    let n = a.n_bus();
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (row, &(f, t)) in a.rows().iter().enumerate() {
        if live[row] {
            adjacency[f].push((t, row));
            adjacency[t].push((f, row));
        }
    }

    let mut component = vec![usize::MAX; n];
    let mut islands = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let label = islands.len();
        component[start] = label;
        let mut stack = vec![start];
        let mut cols = vec![start];
        let mut rows = Vec::new();
        while let Some(u) = stack.pop() {
            for &(v, row) in &adjacency[u] {
                rows.push(row);
                if component[v] == usize::MAX {
                    component[v] = label;
                    stack.push(v);
                    cols.push(v);
                }
            }
        }
        cols.sort_unstable();
        rows.sort_unstable();
        rows.dedup();

        let has_generation = cols.iter().any(|&c| kinds[c].has_generation());
        let reference_col = cols
            .iter()
            .copied()
            .find(|&c| kinds[c] == BusKind::Slack)
            .or_else(|| cols.iter().copied().find(|&c| kinds[c] == BusKind::Generator))
            .unwrap_or(cols[0]);
        islands.push(Island {
            buses: cols.iter().map(|&c| a.bus_ids()[c]).collect(),
            branches: rows.iter().map(|&r| a.branch_ids()[r]).collect(),
            has_generation,
            reference_bus: a.bus_ids()[reference_col],
            bus_cols: cols,
            branch_rows: rows,
            reference_col,
        });
    }
    IslandPartition { islands }
}

/// Voltage angles together with the injections they balance.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSolution {
    pub theta: Vec<f64>,
    /// Injections after island rebalancing (slack absorption or shedding).
    pub balanced_injection: Vec<f64>,
}

/// Rebalance injections island by island.
pub fn rebalance_injections(p: &[f64], partition: &IslandPartition) -> Vec<f64> {
    let mut out = p.to_vec();
    for island in &partition.islands {
        if island.has_generation {
            let imbalance: f64 = island.bus_cols.iter().map(|&c| p[c]).sum();
            out[island.reference_col] -= imbalance;
        } else {
            for &c in &island.bus_cols {
                out[c] = 0.0;
            }
        }
    }
    out
}

/// Solve Aᵀ diag(B) A θ = P_b island by island.
pub fn solve_angles(
    a: &IncidenceMatrix,
    b: &SusceptanceVector,
    p: &[f64],
    partition: &IslandPartition,
) -> Result<AngleSolution> {
    let balanced = rebalance_injections(p, partition);
    let mut theta = vec![0.0; a.n_bus()];
    let mut local = vec![usize::MAX; a.n_bus()];

    for island in &partition.islands {
        if island.branch_rows.is_empty() {
            continue;
        }
        // Local numbering skips the reference column.
        let mut k = 0;
        for &c in &island.bus_cols {
            if c == island.reference_col {
                continue;
            }
            local[c] = k;
            k += 1;
        }
        let mut solver = SymmetricSolver::new(k);
        for &row in &island.branch_rows {
            let (f, t) = a.row(row);
            let w = b[row];
            let (lf, lt) = (local[f], local[t]);
            if f != island.reference_col {
                solver.add(lf, lf, w);
            }
            if t != island.reference_col {
                solver.add(lt, lt, w);
            }
            if f != island.reference_col && t != island.reference_col {
                solver.add(lf, lt, -w);
            }
        }
        let rhs: Vec<f64> = island
            .bus_cols
            .iter()
            .filter(|&&c| c != island.reference_col)
            .map(|&c| balanced[c])
            .collect();

        let singular = |residual: f64| Error::SingularIsland {
            reference_bus: island.reference_bus,
            residual,
        };
        let x = solver.solve(&rhs).ok_or_else(|| singular(f64::INFINITY))?;
        let residual = solver.relative_residual(&x, &rhs);
        if !(residual <= SINGULAR_RESIDUAL) {
            return Err(singular(residual));
        }
        for &c in &island.bus_cols {
            if c != island.reference_col {
                theta[c] = x[local[c]];
            }
            local[c] = usize::MAX;
        }
    }

    Ok(AngleSolution {
        theta,
        balanced_injection: balanced,
    })
}

/// P_e = diag(B) A θ; severed entries are exactly zero.
pub fn branch_flows(a: &IncidenceMatrix, b: &SusceptanceVector, theta: &[f64]) -> FlowVector {
    FlowVector(
        a.rows()
            .iter()
            .zip(b.iter())
            .map(|(&(f, t), &w)| if w == 0.0 { 0.0 } else { w * (theta[f] - theta[t]) })
            .collect(),
    )
}

/// Convenience: islands, angles and flows in one call.
pub fn solve_flows(
    a: &IncidenceMatrix,
    kinds: &[BusKind],
    b: &SusceptanceVector,
    p: &[f64],
) -> Result<(IslandPartition, AngleSolution, FlowVector)> {
    let partition = partition_islands(a, kinds, &b.live_flags());
    let angles = solve_angles(a, b, p, &partition)?;
    let flows = branch_flows(a, b, &angles.theta);
    Ok((partition, angles, flows))
}
