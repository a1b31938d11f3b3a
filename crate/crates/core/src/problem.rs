use crate::discretization::{DiscreteLaplacian, RadialGrid};
use crate::error::Result;
use crate::ground_state::{GroundState, ProfileKind};

/// A grid together with its Laplacian and the ground state sampled on it.
#[derive(Debug, Clone)]
pub struct RadialProblem {
    pub grid: RadialGrid,
    pub laplacian: DiscreteLaplacian,
    pub ground: GroundState,
}

impl RadialProblem {
    pub fn new(d: u32, r_max: f64, n: usize, kind: ProfileKind) -> Result<Self> {
        let grid = RadialGrid::new(d, r_max, n)?;
        let laplacian = DiscreteLaplacian::new(&grid)?;
        let ground = GroundState::new(&grid, kind);
        Ok(RadialProblem {
            grid,
            laplacian,
            ground,
        })
    }

    /// Discrete ground state, the default base profile.
    pub fn discrete(d: u32, r_max: f64, n: usize) -> Result<Self> {
        Self::new(d, r_max, n, ProfileKind::Discrete)
    }
}
