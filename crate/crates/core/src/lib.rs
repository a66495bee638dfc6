//! Simulation and auto-tuning of pneumatically switched capacitor-array
//! matching networks.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coil;
pub mod components;
pub mod error;
pub mod experiments;
pub mod matchnet;
pub mod models;
pub mod netcore;
pub mod pneumo;
pub mod qfactor;
pub mod scenario;
pub mod thermo;
pub mod tuner;

pub use error::{Error, Result};
