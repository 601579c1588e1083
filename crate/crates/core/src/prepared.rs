use crate::error::{Error, Result};
use crate::grid::{apply_hvdc, build_incidence, BranchId, BusKind, IncidenceMatrix, NetworkCase, TcscParams};
use crate::powerflow::{
    branch_flows, partition_islands, solve_angles, AngleSolution, FlowVector, IslandPartition, SusceptanceVector,
};

/// A validated case with HVDC links folded in, laid out as index-ordered
/// vectors (branches by ascending id, buses by ascending id).
#[derive(Debug, Clone)]
pub struct PreparedCase {
    pub incidence: IncidenceMatrix,
    pub kinds: Vec<BusKind>,
    pub injection: Vec<f64>,
    pub reactance: Vec<f64>,
    pub threshold: Vec<f64>,
    pub tcsc: Vec<Option<TcscParams>>,
    /// Live flags before any disturbance.
    pub live: Vec<bool>,
}

impl PreparedCase {
    /// Validate, apply HVDC links and lay the case out.
    pub fn new(case: &NetworkCase) -> Result<Self> {
        case.validate()?;
        let case = apply_hvdc(case)?;
        let branches = case.sorted_branches();
        let buses = case.sorted_buses();
        Ok(Self {
            incidence: build_incidence(&case),
            kinds: buses.iter().map(|b| b.kind).collect(),
            injection: buses.iter().map(|b| b.p_injection).collect(),
            reactance: branches.iter().map(|b| b.reactance).collect(),
            threshold: branches.iter().map(|b| b.threshold).collect(),
            tcsc: branches.iter().map(|b| b.tcsc).collect(),
            live: branches.iter().map(|b| b.live).collect(),
        })
    }

    pub fn n_branch(&self) -> usize {
        self.incidence.n_branch()
    }

    pub fn branch_row(&self, id: BranchId) -> Result<usize> {
        self.incidence.branch_row(id).ok_or(Error::UnknownBranch(id))
    }

    pub fn base_susceptance(&self) -> SusceptanceVector {
        SusceptanceVector::from_reactances(&self.reactance, &self.live)
    }

    pub fn partition(&self, b: &SusceptanceVector) -> IslandPartition {
        partition_islands(&self.incidence, &self.kinds, &b.live_flags())
    }

    pub fn solve(&self, b: &SusceptanceVector, partition: &IslandPartition) -> Result<(AngleSolution, FlowVector)> {
        let angles = solve_angles(&self.incidence, b, &self.injection, partition)?;
        let flows = branch_flows(&self.incidence, b, &angles.theta);
        Ok((angles, flows))
    }

    /// Live branches whose |P_e| strictly exceeds σ.
    pub fn overloaded(&self, b: &SusceptanceVector, flows: &FlowVector) -> Vec<bool> {
        flows
            .iter()
            .zip(&self.threshold)
            .zip(b.iter())
            .map(|((p, s), &w)| w != 0.0 && p.abs() > *s)
            .collect()
    }
}
