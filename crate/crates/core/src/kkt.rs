//! KKT system for minimizing the final-step cost over a bounded disturbance.
//!
//! Unknowns z = (δ, μ1, μ2, x1, x2, y1, y2); the x and y slacks turn the
//! bound and sign constraints into equalities so Newton can treat the
//! whole system as F(z) = 0.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cascade::{simulate_cascade, CascadeConfig, CascadeTrace, Disturbance};
use crate::error::{Error, Result};
use crate::grid::BranchId;
use crate::jfnk::ResidualFunction;
use crate::prepared::PreparedCase;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub low: f64,
    pub high: f64,
}

impl Bounds {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if low.is_finite() && high.is_finite() && low <= high {
            Ok(Self { low, high })
        } else {
            Err(Error::Config(format!("bounds need low <= high, got [{low}, {high}]")))
        }
    }

    pub fn clamp(&self, delta: f64) -> f64 {
        delta.clamp(self.low, self.high)
    }

    pub fn contains(&self, delta: f64) -> bool {
        (self.low..=self.high).contains(&delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktVector {
    pub delta: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl KktVector {
    /// Multipliers at rest, slacks consistent with δ₀.
    pub fn initial(delta0: f64, bounds: &Bounds) -> Self {
        Self {
            delta: delta0,
            mu1: 0.0,
            mu2: 0.0,
            x1: (bounds.high - delta0).max(0.0).sqrt(),
            x2: (delta0 - bounds.low).max(0.0).sqrt(),
            y1: 0.0,
            y2: 0.0,
        }
    }

    pub fn to_array(&self) -> [f64; 7] {
        [self.delta, self.mu1, self.mu2, self.x1, self.x2, self.y1, self.y2]
    }

    pub fn from_slice(z: &[f64]) -> Result<Self> {
        match *z {
            [delta, mu1, mu2, x1, x2, y1, y2] if z.iter().all(|v| v.is_finite()) => Ok(Self {
                delta,
                mu1,
                mu2,
                x1,
                x2,
                y1,
                y2,
            }),
            _ => Err(Error::NonFinite("KKT vector")),
        }
    }
}

/// Components 2 to 7 of the residual: slack feasibility, complementarity and
/// multiplier signs.
pub fn constraint_residual(z: &KktVector, bounds: &Bounds) -> [f64; 6] {
    [
        z.delta - bounds.high + z.x1 * z.x1,
        z.delta - bounds.low - z.x2 * z.x2,
        z.mu1 * (z.delta - bounds.high),
        z.mu2 * (z.delta - bounds.low),
        z.mu1 - z.y1 * z.y1,
        z.mu2 - z.y2 * z.y2,
    ]
}

/// The cascade-driven KKT residual for one disturbed branch.
///
/// Final-step flows are memoized per δ since Newton and GMRES probes
/// revisit the same disturbance many times.
pub struct KktProblem<'a> {
    case: &'a PreparedCase,
    branch: BranchId,
    bounds: Bounds,
    cascade: CascadeConfig,
    eps_sens: f64,
    cache: HashMap<u64, Vec<f64>>,
    simulations: usize,
}

const CACHE_LIMIT: usize = 1 << 14;

impl<'a> KktProblem<'a> {
    pub fn new(
        case: &'a PreparedCase,
        branch: BranchId,
        bounds: Bounds,
        cascade: CascadeConfig,
        eps_sens: f64,
    ) -> Result<Self> {
        let row = case.branch_row(branch)?;
        if !case.live[row] {
            return Err(Error::DisturbedBranchSevered(branch));
        }
        cascade.validate()?;
        if !(eps_sens > 0.0) {
            return Err(Error::Config(format!("eps_sens must be positive, got {eps_sens}")));
        }
        Ok(Self {
            case,
            branch,
            bounds,
            cascade,
            eps_sens,
            cache: HashMap::new(),
            simulations: 0,
        })
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Number of cascade simulations run so far (cache misses).
    pub fn simulations(&self) -> usize {
        self.simulations
    }

    /// Full trace at δ clamped into bounds.
    pub fn trace(&self, delta: f64) -> Result<CascadeTrace> {
        let d = Disturbance {
            branch: self.branch,
            delta: self.bounds.clamp(delta),
        };
        simulate_cascade(self.case, &d, &self.cascade)
    }

    /// Final-step flows P_e^m at δ clamped into bounds.
    pub fn final_flows(&mut self, delta: f64) -> Result<&[f64]> {
        let delta = self.bounds.clamp(delta);
        let key = delta.to_bits();
        if !self.cache.contains_key(&key) {
            if self.cache.len() >= CACHE_LIMIT {
                self.cache.clear();
            }
            let flows = self.trace(delta)?.final_flows().0.clone();
            self.simulations += 1;
            self.cache.insert(key, flows);
        }
        Ok(&self.cache[&key])
    }

    pub fn cost(&mut self, delta: f64) -> Result<f64> {
        Ok(0.5 * self.final_flows(delta)?.iter().map(|p| p * p).sum::<f64>())
    }

    /// ∂P_e^m/∂δ by forward difference, or backward when the forward probe
    /// would leave the upper bound.
    pub fn sensitivity(&mut self, delta: f64) -> Result<Vec<f64>> {
        let delta = self.bounds.clamp(delta);
        let (lo, hi) = if delta + self.eps_sens <= self.bounds.high {
            (delta, delta + self.eps_sens)
        } else {
            (self.bounds.clamp(delta - self.eps_sens), delta)
        };
        let h = hi - lo;
        if h == 0.0 {
            return Ok(vec![0.0; self.case.n_branch()]);
        }
        let p_hi = self.final_flows(hi)?.to_vec();
        let p_lo = self.final_flows(lo)?;
        Ok(p_hi.iter().zip(p_lo).map(|(a, b)| (a - b) / h).collect())
    }

    /// Stationarity P_eᵀ ∂P_e/∂δ, the derivative of J = ½‖P_e‖².
    pub fn gradient(&mut self, delta: f64) -> Result<f64> {
        let s = self.sensitivity(delta)?;
        let p = self.final_flows(delta)?;
        Ok(p.iter().zip(&s).map(|(a, b)| a * b).sum())
    }

    /// The seven KKT components in order.
    pub fn kkt_residual(&mut self, z: &KktVector) -> Result<[f64; 7]> {
        let g = self.gradient(z.delta)?;
        let c = constraint_residual(z, &self.bounds);
        Ok([g + z.mu1 - z.mu2, c[0], c[1], c[2], c[3], c[4], c[5]])
    }
}

impl ResidualFunction for KktProblem<'_> {
    fn eval(&mut self, z: &[f64]) -> Result<Vec<f64>> {
        let z = KktVector::from_slice(z)?;
        Ok(self.kkt_residual(&z)?.to_vec())
    }
}
