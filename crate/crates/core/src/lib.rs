//! Simulation of a nanoscale metal–insulator–semiconductor (MIS) capacitor
//! used as an on-demand single-photon source.
//!
//! The pipeline runs from device electrostatics ([`electrostatics`]) through
//! the gate-defined quantum dot ([`qdot`]) to the pulsed emission cycle
//! ([`cycle`]) and its polarization selection rules ([`zeeman`]).

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod cycle;
pub mod device;
pub mod electrostatics;
pub mod error;
pub mod mesh;
pub mod qdot;
pub mod report;
pub mod zeeman;

pub use error::{Error, Result};
