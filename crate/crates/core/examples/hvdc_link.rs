//! Closed-form HVDC terminal quantities and how a link turns into bus
//! injections on the AC side.
//!
//!     cargo run --example hvdc_link

use gridcascade::grid::apply_hvdc;
use gridcascade::ieee118::{hvdc_link, HVDC_BRANCHES};
use gridcascade::NetworkCase;

fn main() -> gridcascade::Result<()> {
    let link = hvdc_link(HVDC_BRANCHES[0]);
    let t = link.terminal_powers()?;
    println!(
        "alpha = {:.4} rad, gamma = {:.4} rad, R = {}",
        link.alpha, link.gamma, link.r_l
    );
    println!("I_d = {:.10}  P_r = {:.10}  P_i = {:.10}", t.i_d, t.p_r, t.p_i);
    println!("line loss R_L I_d^2 = {:.10}", t.p_r - t.p_i);

    // Two-bus case: the AC branch is replaced by the link.
    let case = NetworkCase::from_json_str(
        r#"{"base_mva": 100, "slack_bus": 1,
        "buses": [{"id": 1, "p": 0.2}, {"id": 2, "p": -0.2}, {"id": 3, "p": 0.0}],
        "branches": [
            {"id": 1, "from": 1, "to": 2, "x": 0.1, "sigma": 2},
            {"id": 2, "from": 2, "to": 3, "x": 0.1, "sigma": 2},
            {"id": 3, "from": 1, "to": 3, "x": 0.1, "sigma": 2}
        ],
        "hvdc": [{"branch": 1, "alpha": 0.2094395102, "gamma": 0.7853981634,
                  "rcr": 0.1, "rci": 0.1, "rl": 0.1, "mva": 10}]}"#,
    )?;
    let ac = apply_hvdc(&case)?;
    for bus in &ac.buses {
        println!("bus {}: p = {:+.6}", bus.id, bus.p_injection);
    }
    println!("branch 1 live: {}", ac.branch(1).is_some_and(|b| b.live));
    Ok(())
}
