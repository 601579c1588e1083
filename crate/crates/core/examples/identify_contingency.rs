//! Worst-case disturbance search on branch 8 of the IEEE 118-bus case,
//! with per-restart details.
//!
//!     cargo run --release --example identify_contingency [SEED]

use gridcascade::cia::{identify, CiaConfig};
use gridcascade::ieee118::{ieee118, DELTA_BOUNDS, DISTURBED_BRANCH};
use gridcascade::kkt::Bounds;
use gridcascade::PreparedCase;

fn main() -> gridcascade::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("SEED must be an integer"));
    let case = PreparedCase::new(&ieee118())?;
    let bounds = Bounds::new(DELTA_BOUNDS.0, DELTA_BOUNDS.1)?;
    let cfg = CiaConfig {
        seed,
        ..Default::default()
    };
    let result = identify(&case, DISTURBED_BRANCH, bounds, &cfg)?;
    for r in &result.restarts {
        match (r.delta_candidate, r.j_candidate) {
            (Some(d), Some(j)) => println!(
                "l = {:2}  delta0 = {:8.4}  -> delta = {:8.4}  J = {:9.4}  newton = {:2}{}",
                r.l,
                r.z0.delta,
                d,
                j,
                r.newton_iterations,
                if r.accepted { "  accepted" } else { "" }
            ),
            _ => println!(
                "l = {:2}  delta0 = {:8.4}  failed: {}",
                r.l,
                r.z0.delta,
                r.error.as_deref().unwrap_or("?")
            ),
        }
    }
    println!(
        "best delta = {:.6}, J = {:.6} (baseline {:.6}), {} outages",
        result.best_delta,
        result.best_cost,
        result.baseline_cost,
        result.trace_of_best.outage_count()
    );
    Ok(())
}
