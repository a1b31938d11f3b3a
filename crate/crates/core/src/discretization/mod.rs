//! Radial grid, sampled fields, the discrete Laplacian and quadrature.

pub mod banded;
mod field;
mod grid;
pub mod interp;
mod laplacian;
pub mod norms;
pub mod quadrature;

pub use field::RadialField;
pub use grid::{build_grid, GridSpec, RadialGrid};
pub use laplacian::{march_profile, DiscreteLaplacian};
pub use norms::{h1_distance, hmm_norm, integrate, weighted_sup_norm};
