//! Symmetric linear solves for island Laplacians.
//!
//! Island Laplacians are sparse and nearly banded once reordered, so they
//! are factored as envelope LDLᵀ under a reverse Cuthill-McKee ordering.
//! A zero pivot falls back to dense LU with partial pivoting.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

/// Accumulates a symmetric matrix entry by entry, then solves it.
pub(crate) struct SymmetricSolver {
    n: usize,
    /// Lower-triangle triplets (row ≥ col); duplicates are summed.
    entries: Vec<(usize, usize, f64)>,
}

impl SymmetricSolver {
    pub(crate) fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    /// Add `v` at (i, j) and, off the diagonal, at (j, i).
    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, v));
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        if self.n == 0 {
            return Some(Vec::new());
        }
        let x = match Envelope::factor(self) {
            Some(f) => self.refine(rhs, |r| Some(f.solve(r))),
            None => {
                let lu = self.dense().lu();
                self.refine(rhs, |r| {
                    lu.solve(&DVector::from_column_slice(r)).map(|x| x.as_slice().to_vec())
                })
            }
        }?;
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    /// Solve, then apply a few rounds of iterative refinement; branches with
    /// near-zero susceptance make island Laplacians badly conditioned.
    fn refine(&self, rhs: &[f64], solve: impl Fn(&[f64]) -> Option<Vec<f64>>) -> Option<Vec<f64>> {
        let mut x = solve(rhs)?;
        for _ in 0..3 {
            if self.relative_residual(&x, rhs) <= 1e-14 {
                break;
            }
            let r = self.residual(&x, rhs);
            let dx = solve(&r)?;
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi += d;
            }
        }
        Some(x)
    }

    fn residual(&self, x: &[f64], rhs: &[f64]) -> Vec<f64> {
        let mut r = rhs.to_vec();
        for &(i, j, v) in &self.entries {
            r[i] -= v * x[j];
            if i != j {
                r[j] -= v * x[i];
            }
        }
        r
    }

    /// ‖Mx − b‖∞ / ‖b‖∞, or the absolute residual when b = 0.
    pub(crate) fn relative_residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let r = self.residual(x, rhs).iter().map(|v| v.abs()).fold(0.0, f64::max);
        let scale = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if scale > 0.0 {
            r / scale
        } else {
            r
        }
    }

    /// Reverse Cuthill-McKee permutation: `order[k]` is the original index
    /// placed at position k.
    fn rcm_order(&self) -> Vec<usize> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, _) in &self.entries {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        let mut seen = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        let mut by_degree: Vec<usize> = (0..self.n).collect();
        by_degree.sort_by_key(|&v| (adj[v].len(), v));
        for &start in &by_degree {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
                next.sort_by_key(|&w| (adj[w].len(), w));
                for w in next {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        order.reverse();
        order
    }

    fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        m
    }
}

/// Envelope LDLᵀ factor in reverse Cuthill-McKee order. Row k of the
/// permuted lower triangle spans columns `first[k]..=k`.
struct Envelope {
    order: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    env: Vec<f64>,
}

impl Envelope {
    fn at(&self, k: usize, c: usize) -> usize {
        self.start[k] + c - self.first[k]
    }

    fn factor(m: &SymmetricSolver) -> Option<Self> {
        let n = m.n;
        let order = m.rcm_order();
        let mut pos = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for &(i, j, _) in &m.entries {
            let (r, c) = (pos[i].max(pos[j]), pos[i].min(pos[j]));
            first[r] = first[r].min(c);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for k in 0..n {
            start.push(start[k] + k - first[k] + 1);
        }
        let mut f = Self {
            order,
            first,
            env: vec![0.0; start[n]],
            start,
        };
        for &(i, j, v) in &m.entries {
            let (r, c) = (pos[i].max(pos[j]), pos[i].min(pos[j]));
            let idx = f.at(r, c);
            f.env[idx] += v;
        }
        let scale = f.env.iter().map(|v| v.abs()).fold(0.0, f64::max);

        // In place: off-diagonals become L, diagonals become D.
        for i in 0..n {
            for j in f.first[i]..i {
                let lo = f.first[i].max(f.first[j]);
                let mut s = f.env[f.at(i, j)];
                for k in lo..j {
                    s -= f.env[f.at(i, k)] * f.env[f.at(j, k)] * f.env[f.at(k, k)];
                }
                let idx = f.at(i, j);
                f.env[idx] = s / f.env[f.at(j, j)];
            }
            let mut d = f.env[f.at(i, i)];
            for k in f.first[i]..i {
                let l = f.env[f.at(i, k)];
                d -= l * l * f.env[f.at(k, k)];
            }
            if !(d.abs() > 1e-14 * scale) {
                return None;
            }
            let idx = f.at(i, i);
            f.env[idx] = d;
        }
        Some(f)
    }

    #[allow(clippy::needless_range_loop)]
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.order.len();
        let mut y: Vec<f64> = self.order.iter().map(|&v| rhs[v]).collect();
        for i in 0..n {
            let mut s = y[i];
            for k in self.first[i]..i {
                s -= self.env[self.at(i, k)] * y[k];
            }
            y[i] = s;
        }
        for i in 0..n {
            y[i] /= self.env[self.at(i, i)];
        }
        for i in (0..n).rev() {
            let yi = y[i];
            for k in self.first[i]..i {
                y[k] -= self.env[self.at(i, k)] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &v) in self.order.iter().enumerate() {
            x[v] = y[k];
        }
        x
    }
}
