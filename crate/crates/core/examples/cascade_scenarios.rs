//! The three IEEE 118-bus scenarios at the same contingency: no FACTS,
//! FACTS with a 0.5 s relay timer, FACTS with a 1 s timer.
//!
//!     cargo run --release --example cascade_scenarios [DELTA]

use gridcascade::ieee118::{ieee118, DELTA_BOUNDS, DISTURBED_BRANCH};
use gridcascade::{simulate_cascade, CascadeConfig, Disturbance, PreparedCase};

fn main() -> gridcascade::Result<()> {
    let delta = std::env::args()
        .nth(1)
        .map_or(DELTA_BOUNDS.1, |s| s.parse().expect("DELTA must be a number"));
    let case = PreparedCase::new(&ieee118())?;
    let d = Disturbance {
        branch: DISTURBED_BRANCH,
        delta,
    };
    let scenarios = [
        ("no FACTS, T = 1", false, 1.0),
        ("FACTS, T = 0.5", true, 0.5),
        ("FACTS, T = 1", true, 1.0),
    ];
    for (label, facts, period) in scenarios {
        let cfg = CascadeConfig {
            facts_enabled: facts,
            relay_period: period,
            ..Default::default()
        };
        let trace = simulate_cascade(&case, &d, &cfg)?;
        println!(
            "{label}: {} outages, {} islands, J = {:.4}",
            trace.outage_count(),
            trace.island_count(),
            trace.final_cost
        );
        for s in trace.steps.iter().filter(|s| !s.tripped.is_empty()) {
            println!(
                "  t = {:>4}  out = {:>3}  tripped {:?}",
                s.time, s.branches_out, s.tripped
            );
        }
    }
    Ok(())
}
