//! Brute-force grid over the disturbance bounds, compared with the
//! Newton-based search.
//!
//!     cargo run --release --example sweep_oracle [N]

use gridcascade::cia::{identify, sweep, CiaConfig};
use gridcascade::ieee118::{ieee118, DELTA_BOUNDS, DISTURBED_BRANCH};
use gridcascade::kkt::Bounds;
use gridcascade::{CascadeConfig, PreparedCase};

fn main() -> gridcascade::Result<()> {
    let n = std::env::args()
        .nth(1)
        .map_or(150, |s| s.parse().expect("N must be an integer"));
    let case = PreparedCase::new(&ieee118())?;
    let bounds = Bounds::new(DELTA_BOUNDS.0, DELTA_BOUNDS.1)?;
    for (facts, period) in [(false, 1.0), (true, 0.5), (true, 1.0)] {
        let cascade = CascadeConfig {
            facts_enabled: facts,
            relay_period: period,
            ..Default::default()
        };
        let grid = sweep(&case, DISTURBED_BRANCH, bounds, n, &cascade, 1)?;
        let best = grid.argmin.as_ref().expect("some grid point simulates");
        let cia = identify(
            &case,
            DISTURBED_BRANCH,
            bounds,
            &CiaConfig {
                cascade,
                ..Default::default()
            },
        )?;
        println!(
            "facts = {facts:5}, T = {period}: grid argmin delta = {:.4} (J = {:.4}); search delta = {:.4} (J = {:.4})",
            best.delta,
            best.cost.unwrap_or(f64::NAN),
            cia.best_delta,
            cia.best_cost
        );
    }
    Ok(())
}
