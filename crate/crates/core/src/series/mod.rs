//! Exponentially accurate approximate solutions near the ground state.

mod expansion;
mod near;
mod nonlinearity;

pub use expansion::{binomial, p_of_z, pz_coefficients, ExpansionTable};
pub use near::{
    default_window, export_bundle, import_bundle, order_forcing, residual_rate, solve_profile, BundleManifest,
    NearSolution, ResidualReport,
};
pub use nonlinearity::{eval_gamma, eval_ir, eval_r};
