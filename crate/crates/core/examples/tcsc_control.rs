//! TCSC reactance response: free decay toward the reference, then a PID
//! loop pushing an overloaded line back toward its threshold.
//!
//!     cargo run --example tcsc_control

use gridcascade::facts::{facts_update, pid_control, step_tcsc, TcscState};
use gridcascade::grid::TcscParams;
use gridcascade::{NetworkCase, PreparedCase};

const PARAMS: TcscParams = TcscParams {
    tc: 1.0,
    xref: 0.0,
    xmin: 0.0,
    xmax: 10.0,
    kp: 4.0,
    ki: 3.0,
    kd: 2.0,
};

fn main() -> gridcascade::Result<()> {
    // u = 0 from X_C = 1: X_C(t) = exp(-t / T_C).
    let dt = 1e-3;
    let mut s = TcscState {
        x_c: 1.0,
        integral: 0.0,
        prev_error: 0.0,
    };
    for _ in 0..1000 {
        let pid = pid_control(0.0, &s, &PARAMS, dt);
        s = step_tcsc(&s, 0.0, &pid, &PARAMS, dt);
    }
    println!("free decay: X_C(1) = {:.6}, exp(-1) = {:.6}", s.x_c, (-1f64).exp());

    // Triangle where the direct branch carries 2/3 against a 0.6 threshold.
    let case = PreparedCase::new(&NetworkCase::from_json_str(&format!(
        r#"{{"base_mva": 100, "slack_bus": 1,
        "buses": [{{"id": 1, "p": 1.0}}, {{"id": 2, "p": 0.0}}, {{"id": 3, "p": -1.0}}],
        "branches": [
            {{"id": 1, "from": 1, "to": 3, "x": 0.1, "sigma": 0.6, "tcsc": {}}},
            {{"id": 2, "from": 1, "to": 2, "x": 0.1, "sigma": 5}},
            {{"id": 3, "from": 2, "to": 3, "x": 0.1, "sigma": 5}}
        ]}}"#,
        serde_json::to_string(&PARAMS)?
    ))?)?;
    let mut b = case.base_susceptance();
    let mut states: Vec<_> = case
        .tcsc
        .iter()
        .map(|t| t.as_ref().map(TcscState::at_reference))
        .collect();
    println!("\n   t    X_C      |P_1|");
    for k in 1..=10 {
        let out = facts_update(&case, &b, &case.reactance, &states, 2.0, 0.01)?;
        b = out.susceptance;
        states = out.states;
        let flows = case.solve(&b, &case.partition(&b))?.1;
        println!("{:4}  {:.4}  {:.4}", 2 * k, states[0].unwrap().x_c, flows[0].abs());
    }
    Ok(())
}
