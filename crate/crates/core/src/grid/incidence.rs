use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{BranchId, BusId, NetworkCase};

/// Branch-bus incidence matrix stored row-wise as (from column, to column).
///
/// Rows follow ascending branch id, columns ascending bus id. Every branch
/// gets a row regardless of its live flag; outages are expressed through a
/// zero susceptance instead.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    bus_ids: Vec<BusId>,
    branch_ids: Vec<BranchId>,
    rows: Vec<(usize, usize)>,
}

pub fn build_incidence(case: &NetworkCase) -> IncidenceMatrix {
    let bus_ids: Vec<BusId> = case.sorted_buses().iter().map(|b| b.id).collect();
    let col: BTreeMap<BusId, usize> = bus_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let branches = case.sorted_branches();
    IncidenceMatrix {
        bus_ids,
        branch_ids: branches.iter().map(|b| b.id).collect(),
        rows: branches.iter().map(|b| (col[&b.from_bus], col[&b.to_bus])).collect(),
    }
}

impl IncidenceMatrix {
    pub fn n_branch(&self) -> usize {
        self.rows.len()
    }

    pub fn n_bus(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn bus_ids(&self) -> &[BusId] {
        &self.bus_ids
    }

    pub fn branch_ids(&self) -> &[BranchId] {
        &self.branch_ids
    }

    /// (from, to) column pair of row `i`.
    pub fn row(&self, i: usize) -> (usize, usize) {
        self.rows[i]
    }

    pub fn rows(&self) -> &[(usize, usize)] {
        &self.rows
    }

    pub fn bus_column(&self, id: BusId) -> Option<usize> {
        self.bus_ids.binary_search(&id).ok()
    }

    pub fn branch_row(&self, id: BranchId) -> Option<usize> {
        self.branch_ids.binary_search(&id).ok()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n_branch(), self.n_bus());
        for (i, &(f, t)) in self.rows.iter().enumerate() {
            a[(i, f)] = 1.0;
            a[(i, t)] = -1.0;
        }
        a
    }

    /// A x for a bus-indexed vector x.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|&(f, t)| x[f] - x[t]).collect()
    }

    /// Aᵀ y for a branch-indexed vector y.
    pub fn mul_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_bus()];
        for (&(f, t), v) in self.rows.iter().zip(y) {
            out[f] += v;
            out[t] -= v;
        }
        out
    }

    /// The same matrix with one branch row deleted.
    pub fn without_branch(&self, id: BranchId) -> Option<IncidenceMatrix> {
        let i = self.branch_row(id)?;
        let mut out = self.clone();
        out.rows.remove(i);
        out.branch_ids.remove(i);
        Some(out)
    }
}
