//! Regenerate data/ieee118.json from the MATPOWER source.
//!
//!     cargo run --example build_ieee118 [OUT]

use gridcascade::ieee118::{build_ieee118, CASE118_M};

fn main() -> gridcascade::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/ieee118.json").to_string());
    let case = build_ieee118(CASE118_M)?;
    std::fs::write(&out, case.to_json_string()? + "\n")?;
    println!(
        "wrote {} ({} buses, {} branches)",
        out,
        case.buses.len(),
        case.branches.len()
    );
    Ok(())
}
