//! Build the scenario comparison table from three cascade traces.
//!
//!     cargo run --release --example scenario_report

use gridcascade::ieee118::{ieee118, DELTA_BOUNDS, DISTURBED_BRANCH};
use gridcascade::report::compare;
use gridcascade::{simulate_cascade, CascadeConfig, Disturbance, PreparedCase};

fn main() -> gridcascade::Result<()> {
    let case = PreparedCase::new(&ieee118())?;
    let d = Disturbance {
        branch: DISTURBED_BRANCH,
        delta: DELTA_BOUNDS.1,
    };
    let mut traces = Vec::new();
    for (label, facts, period) in [
        ("no-facts", false, 1.0),
        ("facts-T0.5", true, 0.5),
        ("facts-T1", true, 1.0),
    ] {
        let cfg = CascadeConfig {
            facts_enabled: facts,
            relay_period: period,
            ..Default::default()
        };
        traces.push((label.to_string(), simulate_cascade(&case, &d, &cfg)?));
    }
    let report = compare(&traces)?;
    print!("{}", report.to_table());
    report.write_csv(std::io::stdout())
}
