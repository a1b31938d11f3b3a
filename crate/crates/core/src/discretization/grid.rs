use serde::{Deserialize, Serialize};

use super::quadrature::ExteriorTail;
use crate::error::{Error, Result};
use crate::ground_state::Dimension;

/// The three numbers that identify a radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: u32,
    pub r_max: f64,
    pub n: usize,
}

/// Uniform radial grid on [0, r_max] with nodes `r_i = i h`, `i = 0..=n`.
///
/// Two weight sets are kept. `weights` are trapezoid quadrature weights
/// `omega r^(d-1) h` used by all reported integrals; `volumes` are the dual
/// control volumes of the finite-volume Laplacian and define the inner product
/// in which that operator is symmetric.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    spec: GridSpec,
    dim: Dimension,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    volumes: Vec<f64>,
    couplings: Vec<f64>,
    tail: ExteriorTail,
}

pub fn build_grid(d: u32, r_max: f64, n: usize) -> Result<RadialGrid> {
    RadialGrid::new(d, r_max, n)
}

impl RadialGrid {
    pub fn new(d: u32, r_max: f64, n: usize) -> Result<Self> {
        let dim = Dimension::new(d)?;
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::param("r_max", format!("must be positive, got {r_max}")));
        }
        if n < 16 {
            return Err(Error::param("n", format!("need at least 16 intervals, got {n}")));
        }
        let h = r_max / n as f64;
        let df = d as f64;
        let omega = dim.sphere_area();
        let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let mut weights: Vec<f64> = nodes.iter().map(|r| omega * r.powf(df - 1.0) * h).collect();
        weights[n] *= 0.5;
        let volumes = nodes
            .iter()
            .map(|&r| {
                let hi = (r + 0.5 * h).min(r_max);
                let lo = (r - 0.5 * h).max(0.0);
                omega * (hi.powf(df) - lo.powf(df)) / df
            })
            .collect();
        let couplings = (0..n)
            .map(|i| omega * ((i as f64 + 0.5) * h).powf(df - 1.0) / h)
            .collect();
        Ok(RadialGrid {
            spec: GridSpec { d, r_max, n },
            dim,
            h,
            nodes,
            weights,
            volumes,
            couplings,
            tail: ExteriorTail::new(dim, r_max),
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn d(&self) -> u32 {
        self.spec.d
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of stored samples, `n + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Face couplings `omega r_(i+1/2)^(d-1) / h`, one per interval.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn tail(&self) -> ExteriorTail {
        self.tail
    }

    pub fn ball_volume(&self) -> f64 {
        let d = self.spec.d as f64;
        self.dim.sphere_area() * self.spec.r_max.powf(d) / d
    }

    pub(crate) fn check(&self, other: GridSpec) -> Result<()> {
        if other == self.spec {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "field on {other:?}, grid is {:?}",
                self.spec
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes_tile_the_ball() {
        let g = RadialGrid::new(6, 10.0, 200).unwrap();
        let total: f64 = g.volumes().iter().sum();
        assert!((total / g.ball_volume() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_weights_match_ball_volume() {
        let g = RadialGrid::new(5, 8.0, 4000).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total / g.ball_volume() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(RadialGrid::new(2, 1.0, 100).is_err());
        assert!(RadialGrid::new(6, -1.0, 100).is_err());
        assert!(RadialGrid::new(6, 1.0, 4).is_err());
    }
}
