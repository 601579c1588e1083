//! Cascading-failure simulation of DC power grids with series FACTS
//! devices, HVDC links and overload relays, and worst-case contingency
//! search over a bounded line disturbance.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod cia;
pub mod cli;
pub mod error;
pub mod facts;
pub mod grid;
pub mod ieee118;
pub mod jfnk;
pub mod kkt;
pub mod krylov;
mod linalg;
pub mod manifest;
pub mod powerflow;
pub mod prepared;
pub mod report;

pub use cascade::{simulate_cascade, CascadeConfig, CascadeTrace, Disturbance};
pub use error::{Error, Result};
pub use grid::NetworkCase;
pub use prepared::PreparedCase;
