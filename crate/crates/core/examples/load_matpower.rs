//! Import a MATPOWER case file and solve its base DC power flow.
//!
//!     cargo run --example load_matpower [CASE.m]

use gridcascade::grid::{load_case, CaseFormat, MatpowerOptions};
use gridcascade::ieee118::CASE118_M;
use gridcascade::{NetworkCase, PreparedCase};

fn main() -> gridcascade::Result<()> {
    let case = match std::env::args().nth(1) {
        Some(path) => load_case(&path, CaseFormat::MatpowerM)?,
        None => NetworkCase::from_matpower_str(CASE118_M, &MatpowerOptions::default())?,
    };
    println!(
        "{} buses, {} branches, base {} MVA",
        case.buses.len(),
        case.branches.len(),
        case.base_mva
    );
    let prepared = PreparedCase::new(&case)?;
    let b = prepared.base_susceptance();
    let (_, flows) = prepared.solve(&b, &prepared.partition(&b))?;
    let (row, worst) = flows
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p.abs() / prepared.threshold[i]))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    println!(
        "heaviest loading: branch {} at {:.1}% of its rating",
        prepared.incidence.branch_ids()[row],
        100.0 * worst
    );
    Ok(())
}
