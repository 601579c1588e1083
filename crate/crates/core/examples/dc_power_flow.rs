//! DC power flow on a small meshed case, then again after a branch is cut
//! so the network splits into two islands.
//!
//!     cargo run --example dc_power_flow

use gridcascade::{NetworkCase, PreparedCase};

const CASE: &str = r#"{
  "base_mva": 100, "slack_bus": 1,
  "buses": [
    {"id": 1, "p": 1.5}, {"id": 2, "p": -0.5}, {"id": 3, "p": -0.6},
    {"id": 4, "p": 0.3}, {"id": 5, "p": -0.7}
  ],
  "branches": [
    {"id": 1, "from": 1, "to": 2, "x": 0.06, "sigma": 2},
    {"id": 2, "from": 1, "to": 3, "x": 0.24, "sigma": 2},
    {"id": 3, "from": 2, "to": 3, "x": 0.18, "sigma": 2},
    {"id": 4, "from": 3, "to": 4, "x": 0.04, "sigma": 2},
    {"id": 5, "from": 4, "to": 5, "x": 0.12, "sigma": 2}
  ]
}"#;

fn show(case: &PreparedCase, b: &gridcascade::powerflow::SusceptanceVector) -> gridcascade::Result<()> {
    let partition = case.partition(b);
    let (angles, flows) = case.solve(b, &partition)?;
    println!("{} island(s)", partition.len());
    for island in &partition.islands {
        println!("  buses {:?}, reference {}", island.buses, island.reference_bus);
    }
    for (i, p) in flows.iter().enumerate() {
        println!("  branch {}: P = {p:+.4}", case.incidence.branch_ids()[i]);
    }
    println!("  theta = {:.4?}", angles.theta);
    Ok(())
}

fn main() -> gridcascade::Result<()> {
    let case = PreparedCase::new(&NetworkCase::from_json_str(CASE)?)?;
    let mut b = case.base_susceptance();
    println!("intact network:");
    show(&case, &b)?;

    // Cutting 4 separates bus 4 and 5 from the rest.
    b.0[case.branch_row(4)?] = 0.0;
    println!("\nbranch 4 severed:");
    show(&case, &b)
}
