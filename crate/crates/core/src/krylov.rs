//! Restarted GMRES (Arnoldi with Givens rotations) over a matrix-free operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmresConfig {
    /// Relative tolerance on ‖b − Ax‖ / ‖b‖.
    pub tol: f64,
    /// Krylov subspace dimension per cycle.
    pub restart: usize,
    pub max_restarts: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            restart: 7,
            max_restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// False when the cycles ran out before reaching the tolerance; `x` is
    /// then the best iterate found.
    pub converged: bool,
    /// Estimated ‖b − Ax‖ after every inner iteration.
    pub residual_history: Vec<f64>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Solve `A x = rhs` where `matvec(v)` returns `A v`.
pub fn gmres<F>(mut matvec: F, rhs: &[f64], x0: &[f64], cfg: &GmresConfig) -> Result<GmresOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if cfg.restart == 0 || !(cfg.tol > 0.0) {
        return Err(Error::Config(format!("invalid GMRES config {cfg:?}")));
    }
    let n = rhs.len();
    let b_norm = norm(rhs);
    let target = cfg.tol * if b_norm > 0.0 { b_norm } else { 1.0 };
    let mut x = x0.to_vec();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut beta = 0.0;

    for _ in 0..=cfg.max_restarts {
        let ax = matvec(&x)?;
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        beta = norm(&r);
        if !beta.is_finite() {
            return Err(Error::NonFinite("GMRES residual"));
        }
        if beta <= target {
            return Ok(GmresOutcome {
                x,
                residual_norm: beta,
                iterations,
                converged: true,
                residual_history: history,
            });
        }

        let m = cfg.restart.min(n.max(1));
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Column j of the Hessenberg matrix, rotated in place.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut rot: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;

        while k < m {
            let mut w = matvec(&basis[k])?;
            let mut col = vec![0.0; k + 2];
            for (i, v) in basis.iter().enumerate() {
                col[i] = dot(&w, v);
                for (wj, vj) in w.iter_mut().zip(v) {
                    *wj -= col[i] * vj;
                }
            }
            let h_next = norm(&w);
            col[k + 1] = h_next;
            let breakdown = h_next <= 1e-14 * beta;

            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a, b) = (col[i], col[i + 1]);
                col[i] = c * a + s * b;
                col[i + 1] = -s * a + c * b;
            }
            let (c, s) = givens(col[k], col[k + 1]);
            col[k] = c * col[k] + s * col[k + 1];
            col[k + 1] = 0.0;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            rot.push((c, s));
            h.push(col);
            iterations += 1;
            k += 1;
            history.push(g[k].abs());

            if breakdown || g[k].abs() <= target {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        // Back substitution on the k×k triangle.
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[j][i] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("GMRES iterate"));
        }
    }

    let ax = matvec(&x)?;
    beta = beta.min(norm(&rhs.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>()));
    Ok(GmresOutcome {
        converged: beta <= target,
        x,
        residual_norm: beta,
        iterations,
        residual_history: history,
    })
}
