//! Nonlinear Poisson solver for the axisymmetric device.
//!
//! `∇·(ε∇V) = −ρ(V)` is discretized with a vertex-centred finite-volume
//! (box) scheme on the (r, z) mesh. The only mobile charge is the 2D
//! electron and hole gas in the quantum well, described with zero-temperature
//! Thomas–Fermi statistics.

mod charge;
mod export;
mod newton;
mod operator;
mod sweep;

pub use charge::{
    charge_density, electron_sheet_density, hole_sheet_density, ChargeState, WellStatistics,
};
pub use export::{write_band_profile_csv, BAND_PROFILE_HEADER};
pub use newton::{newton_solve, GaussBalance, PoissonSolver, PotentialField, SolverOptions};
pub use operator::{assemble_system, FvOperator, LinearProblem};
pub use sweep::bias_sweep;
