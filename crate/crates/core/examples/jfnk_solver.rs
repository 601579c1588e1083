//! GMRES on a small dense system and JFNK on a nonlinear one, both
//! matrix-free.
//!
//!     cargo run --example jfnk_solver

use gridcascade::jfnk::{jfnk_solve, JfnkConfig};
use gridcascade::krylov::{gmres, GmresConfig};

fn main() -> gridcascade::Result<()> {
    let a = [[4.0, 1.0, 0.0], [1.0, 3.0, -1.0], [0.0, -1.0, 2.0]];
    let matvec = |v: &[f64]| {
        Ok(a.iter()
            .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
            .collect())
    };
    let out = gmres(matvec, &[1.0, 2.0, 3.0], &[0.0; 3], &GmresConfig::default())?;
    println!(
        "GMRES: x = {:.6?} after {} iterations, residual {:.2e}",
        out.x, out.iterations, out.residual_norm
    );

    // x^2 + y^2 = 4, x y = 1.
    let mut f = |z: &[f64]| Ok(vec![z[0] * z[0] + z[1] * z[1] - 4.0, z[0] * z[1] - 1.0]);
    let report = jfnk_solve(&mut f, &[2.0, 0.3], &JfnkConfig::default())?;
    for it in &report.iterations {
        println!(
            "  s = {:2}  |F| = {:.3e}  step = {:.3e}",
            it.s, it.residual_norm, it.eps
        );
    }
    println!("JFNK: z = {:.10?}, converged = {}", report.z, report.converged);
    Ok(())
}
