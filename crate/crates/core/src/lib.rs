//! Radial numerics for the focusing energy-critical nonlinear Schrodinger
//! equation `i u_t + Delta u + |u|^{p-1} u = 0`, `p = (d+2)/(d-2)`.
//!
//! The crate samples the ground state `W`, computes the unstable eigenpair of
//! the linearization around it, builds exponentially accurate approximate
//! solutions `W + sum_j e^{-j e0 t} Phi_j`, evolves them with a conservative
//! scheme and classifies the resulting trajectories.

pub mod diagnostics;
pub mod discretization;
pub mod error;
pub mod evolver;
pub mod experiments;
pub mod ground_state;
mod problem;
pub mod series;
pub mod spectrum;

pub use discretization::{RadialField, RadialGrid};
pub use error::{Error, Result};
pub use problem::RadialProblem;
pub use ground_state::{Dimension, GroundState, ProfileKind, SymmetryParams};
