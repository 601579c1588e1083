//! Jacobian-free Newton-Krylov: Newton steps solved by GMRES over
//! finite-difference Jacobian-vector products.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{gmres, norm, GmresConfig};

/// A deterministic map z → F(z).
pub trait ResidualFunction {
    fn eval(&mut self, z: &[f64]) -> Result<Vec<f64>>;
}

impl<F> ResidualFunction for F
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    fn eval(&mut self, z: &[f64]) -> Result<Vec<f64>> {
        self(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JfnkConfig {
    /// Finite-difference step for the flow sensitivity ∂P_e/∂δ.
    pub eps_sens: f64,
    /// Jv probe is ξ = xi_scale · (1 + ‖z‖).
    pub xi_scale: f64,
    /// Stop once ‖δz‖ / ‖z‖ falls to this.
    pub eps_min: f64,
    pub max_newton: usize,
    pub krylov_dim: usize,
    pub gmres_tol: f64,
    pub gmres_restart: usize,
    /// Consecutive iterations in which ‖F‖ drops by less than a relative
    /// 1e-6 before giving up.
    pub stagnation: usize,
}

impl Default for JfnkConfig {
    fn default() -> Self {
        Self {
            eps_sens: 1e-2,
            xi_scale: 1e-7,
            eps_min: 1e-8,
            max_newton: 50,
            krylov_dim: 7,
            gmres_tol: 1e-10,
            gmres_restart: 7,
            stagnation: 3,
        }
    }
}

impl JfnkConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.eps_sens, self.xi_scale, self.eps_min, self.gmres_tol]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if positive
            && self.eps_min < 1.0
            && self.max_newton > 0
            && self.krylov_dim > 0
            && self.gmres_restart > 0
            && self.stagnation > 0
        {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid JFNK config {self:?}")))
        }
    }

    pub fn xi(&self, z: &[f64]) -> f64 {
        self.xi_scale * (1.0 + norm(z))
    }

    fn gmres(&self) -> GmresConfig {
        GmresConfig {
            tol: self.gmres_tol,
            restart: self.krylov_dim,
            max_restarts: self.gmres_restart.div_ceil(self.krylov_dim).max(1) - 1,
        }
    }
}

const STALL_TOL: f64 = 1e-6;

/// (F(z + ξv) − F(z)) / ξ.
pub fn jvp<R: ResidualFunction + ?Sized>(f: &mut R, z: &[f64], v: &[f64], xi: f64) -> Result<Vec<f64>> {
    let fz = f.eval(z)?;
    jvp_at(f, z, &fz, v, xi)
}

fn jvp_at<R: ResidualFunction + ?Sized>(f: &mut R, z: &[f64], fz: &[f64], v: &[f64], xi: f64) -> Result<Vec<f64>> {
    if v.iter().all(|x| *x == 0.0) {
        return Ok(vec![0.0; fz.len()]);
    }
    let probe: Vec<f64> = z.iter().zip(v).map(|(a, b)| a + xi * b).collect();
    let fp = f.eval(&probe)?;
    Ok(fp.iter().zip(fz).map(|(a, b)| (a - b) / xi).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonRecord {
    pub s: usize,
    pub residual_norm: f64,
    /// ‖δz^{s-1}‖ / ‖z^{s-1}‖; 1 at s = 0.
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JfnkReport {
    pub z: Vec<f64>,
    pub converged: bool,
    pub iterations: Vec<NewtonRecord>,
}

impl JfnkReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.iterations)?)
    }
}

/// Newton iteration z ← z + δz with J δz = −F(z) solved by GMRES from δz = 0.
pub fn jfnk_solve<R: ResidualFunction + ?Sized>(f: &mut R, z0: &[f64], cfg: &JfnkConfig) -> Result<JfnkReport> {
    cfg.validate()?;
    let gcfg = cfg.gmres();
    let mut z = z0.to_vec();
    let mut fz = f.eval(&z)?;
    let mut eps = 1.0;
    let mut records = Vec::new();
    let mut previous = f64::INFINITY;
    let mut stalled = 0;

    for s in 0..cfg.max_newton {
        let r = norm(&fz);
        if !r.is_finite() {
            return Err(Error::NonFinite("KKT residual"));
        }
        records.push(NewtonRecord {
            s,
            residual_norm: r,
            eps,
        });
        if r == 0.0 {
            return Ok(JfnkReport {
                z,
                converged: true,
                iterations: records,
            });
        }
        if r < previous * (1.0 - STALL_TOL) {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= cfg.stagnation {
                return Err(Error::NoProgress {
                    iterations: s,
                    residual: r,
                });
            }
        }
        previous = r;

        let xi = cfg.xi(&z);
        let rhs: Vec<f64> = fz.iter().map(|v| -v).collect();
        let zero = vec![0.0; z.len()];
        let step = {
            let (zc, fc) = (&z, &fz);
            gmres(|v: &[f64]| jvp_at(f, zc, fc, v, xi), &rhs, &zero, &gcfg)?
        };
        let z_norm = norm(&z);
        let dz_norm = norm(&step.x);
        for (zi, d) in z.iter_mut().zip(&step.x) {
            *zi += d;
        }
        eps = if z_norm > 0.0 { dz_norm / z_norm } else { dz_norm };
        fz = f.eval(&z)?;
        if eps <= cfg.eps_min {
            records.push(NewtonRecord {
                s: s + 1,
                residual_norm: norm(&fz),
                eps,
            });
            return Ok(JfnkReport {
                z,
                converged: true,
                iterations: records,
            });
        }
    }
    records.push(NewtonRecord {
        s: cfg.max_newton,
        residual_norm: norm(&fz),
        eps,
    });
    Ok(JfnkReport {
        z,
        converged: false,
        iterations: records,
    })
}
