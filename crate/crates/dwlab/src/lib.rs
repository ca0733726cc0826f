//! Pseudospectral laboratory for the damped wave equation
//! `u_tt - Lap u + u_t = |u_t|^p` on a large periodic box, with parameter
//! admissibility checking, decay-rate measurement, and a fixed-point solver
//! whose contraction behaviour can be certified numerically.

pub mod admissibility;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod grid;
pub mod kernel;
pub mod solver;
pub mod spaces;
pub mod verify;

pub use admissibility::{derive_params, AdmissibleParams, Overrides, ValidationReport};
pub use error::{DwError, Result};
pub use grid::{Field, Grid, SpectralField};
pub use kernel::{k_hat, k_hat_dt, k_hat_dtt, kernel_values, CutoffSpec, KernelValues};
pub use solver::{
    linear_trajectory, make_initial, picard_solve, solve, InitialKind, PicardReport, State,
    Trajectory,
};
pub use spaces::{lp_norm, sobolev_norm, x_norm, y_norm, NormSample, SpaceWeights};
pub use verify::{fit_decay, verify_inequality, verify_linear_estimates, DecayFit, RatioReport};
