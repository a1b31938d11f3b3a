//! The ground state `W`, its symmetry orbit and the conserved functionals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::interp::{ComplexCubic, MonotoneCubic, Tail};
use crate::discretization::norms::{self, Parity};
use crate::discretization::{march_profile, RadialField, RadialGrid};
use crate::error::{Error, Result};

/// Space dimension `d >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(d: u32) -> Result<Self> {
        Dimension::new(d)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        if d >= 3 {
            Ok(Dimension(d))
        } else {
            Err(Error::InvalidDimension { d })
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `p = (d+2)/(d-2)`.
    pub fn critical_exponent(self) -> f64 {
        let d = self.0 as f64;
        (d + 2.0) / (d - 2.0)
    }

    /// `q = p + 1 = 2d/(d-2)`.
    pub fn energy_exponent(self) -> f64 {
        let d = self.0 as f64;
        2.0 * d / (d - 2.0)
    }

    /// `(d-2)/2`, the scaling weight of the critical norm.
    pub fn scaling_power(self) -> f64 {
        0.5 * (self.0 as f64 - 2.0)
    }

    /// Surface area of the unit sphere in `R^d`.
    pub fn sphere_area(self) -> f64 {
        use std::f64::consts::PI;
        // |S^{d-1}| = 2 pi/(d-2) |S^{d-3}|
        let mut d = self.0;
        let mut s = if d % 2 == 0 { 2.0 * PI } else { 2.0 };
        let base = if d % 2 == 0 { 2 } else { 1 };
        let mut factors = Vec::new();
        while d > base {
            factors.push(2.0 * PI / (d as f64 - 2.0));
            d -= 2;
        }
        for f in factors.into_iter().rev() {
            s *= f;
        }
        s
    }

    /// Whether `W` is square integrable on `R^d`.
    pub fn ground_state_in_l2(self) -> bool {
        self.0 >= 5
    }
}

/// `p = (d+2)/(d-2)` for `d >= 3`.
pub fn critical_exponent(d: u32) -> Result<f64> {
    Ok(Dimension::new(d)?.critical_exponent())
}

/// `W(r) = (1 + r^2/(d(d-2)))^(-(d-2)/2)`.
pub fn eval_w(dim: Dimension, r: f64) -> f64 {
    let d = dim.get() as f64;
    (1.0 + r * r / (d * (d - 2.0))).powf(-0.5 * (d - 2.0))
}

/// `W'(r)`.
pub fn eval_w_prime(dim: Dimension, r: f64) -> f64 {
    let d = dim.get() as f64;
    let a = d * (d - 2.0);
    -(d - 2.0) / a * r * (1.0 + r * r / a).powf(-0.5 * d)
}

/// Phase rotation and `H^1`-critical scaling: `u -> e^{i theta} mu^{-(d-2)/2} u(r/mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryParams {
    pub theta: f64,
    pub mu: f64,
}

impl SymmetryParams {
    pub const IDENTITY: SymmetryParams = SymmetryParams { theta: 0.0, mu: 1.0 };

    fn validate(self, grid: &RadialGrid) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0 && self.theta.is_finite()) {
            return Err(Error::param(
                "mu",
                format!("need finite theta and mu > 0, got {self:?}"),
            ));
        }
        if grid.r_max() / self.mu < 2.0 * grid.h() {
            return Err(Error::ScaleOutOfDomain { mu: self.mu });
        }
        Ok(())
    }
}

/// Resamples `e^{i theta} mu^{-(d-2)/2} u(r/mu)` on the grid of `u`.
///
/// Values needed beyond `r_max` are extrapolated with the `r^{-(d-2)}` decay
/// of finite-energy radial profiles.
pub fn apply_symmetry(u: &RadialField, s: SymmetryParams, grid: &RadialGrid) -> Result<RadialField> {
    grid.check(u.spec())?;
    s.validate(grid)?;
    let dim = grid.dim();
    if s.mu == 1.0 {
        return Ok(u.scale(Complex64::from_polar(1.0, s.theta)));
    }
    let interp = ComplexCubic::new(grid.h(), u.values(), Tail::PowerLaw(dim.get() as f64 - 2.0));
    let factor = Complex64::from_polar(s.mu.powf(-dim.scaling_power()), s.theta);
    Ok(RadialField::from_fn(grid, |r| factor * interp.eval(r / s.mu)))
}

/// Which profile plays the role of `W` on a given grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    /// Samples of the closed form.
    ClosedForm,
    /// Exact fixed point of `Delta_h U + U^p = 0` with `U(0) = 1`.
    Discrete,
}

/// The ground state sampled on a grid, plus its modulated family.
#[derive(Debug, Clone)]
pub struct GroundState {
    kind: ProfileKind,
    dim: Dimension,
    values: Vec<f64>,
    correction: MonotoneCubic,
}

impl GroundState {
    pub fn new(grid: &RadialGrid, kind: ProfileKind) -> Self {
        let dim = grid.dim();
        let closed: Vec<f64> = grid.nodes().iter().map(|&r| eval_w(dim, r)).collect();
        let values = match kind {
            ProfileKind::ClosedForm => closed.clone(),
            ProfileKind::Discrete => march_profile(grid),
        };
        let delta: Vec<f64> = values.iter().zip(&closed).map(|(u, w)| u - w).collect();
        GroundState {
            kind,
            dim,
            values,
            correction: MonotoneCubic::new(grid.h(), &delta, Tail::PowerLaw(dim.get() as f64 - 2.0)),
        }
    }

    pub fn closed_form(grid: &RadialGrid) -> Self {
        Self::new(grid, ProfileKind::ClosedForm)
    }

    pub fn discrete(grid: &RadialGrid) -> Self {
        Self::new(grid, ProfileKind::Discrete)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn field(&self, grid: &RadialGrid) -> RadialField {
        RadialField::from_real(grid, &self.values).expect("ground state built on this grid")
    }

    /// Profile value at an arbitrary radius (closed form plus interpolated
    /// discrete correction).
    pub fn profile(&self, r: f64) -> f64 {
        eval_w(self.dim, r) + self.correction.eval(r)
    }

    /// `e^{i theta} mu^{-(d-2)/2} W(r/mu)` sampled on the grid.
    pub fn modulated(&self, s: SymmetryParams, grid: &RadialGrid) -> Result<RadialField> {
        s.validate(grid)?;
        let amp = s.mu.powf(-self.dim.scaling_power());
        let phase = Complex64::from_polar(amp, s.theta);
        Ok(RadialField::from_fn(grid, |r| phase * self.profile(r / s.mu)))
    }

    /// Real part of `e^{i theta} mu^{-(d-2)/2} W(r/mu)`, with derivatives
    /// sampled on the grid.
    pub(crate) fn modulated_real(&self, mu: f64, grid: &RadialGrid) -> Vec<f64> {
        let amp = mu.powf(-self.dim.scaling_power());
        grid.nodes()
            .iter()
            .map(|&r| amp * self.profile(r / mu))
            .collect()
    }

    /// Generator of scaling, `(d-2)/2 W + r W'`.
    pub fn scaling_direction(&self, grid: &RadialGrid) -> RadialField {
        let w = self.field(grid);
        let dw = norms::radial_derivative(w.values(), grid.h(), Parity::Even);
        let k = self.dim.scaling_power();
        let vals = w
            .values()
            .iter()
            .zip(&dw)
            .zip(grid.nodes())
            .map(|((u, du), &r)| u * k + du * r)
            .collect();
        RadialField::from_values(grid, vals).expect("same grid")
    }
}

/// `||grad u||_{L^2}`.
pub fn kinetic_norm(u: &RadialField, grid: &RadialGrid) -> Result<f64> {
    Ok(norms::dirichlet_integral(u, grid)?.sqrt())
}

/// `||u||_{L^q}^q` with `q = 2d/(d-2)`.
pub fn potential_integral(u: &RadialField, grid: &RadialGrid) -> Result<f64> {
    norms::critical_lq_integral(u, grid)
}

/// `E(u) = 1/2 ||grad u||^2 - (1/q) ||u||_q^q`.
pub fn energy(u: &RadialField, grid: &RadialGrid) -> Result<f64> {
    let q = grid.dim().energy_exponent();
    let k = norms::dirichlet_integral(u, grid)?;
    let p = norms::critical_lq_integral(u, grid)?;
    Ok(0.5 * k - p / q)
}

/// `||u||_{L^q} / ||grad u||_{L^2}`; maximised by the ground-state orbit.
pub fn sobolev_quotient(u: &RadialField, grid: &RadialGrid) -> Result<f64> {
    let q = grid.dim().energy_exponent();
    let k = norms::dirichlet_integral(u, grid)?;
    if k == 0.0 {
        return Err(Error::param("u", "zero field has no Sobolev quotient"));
    }
    let p = norms::critical_lq_integral(u, grid)?;
    Ok(p.powf(1.0 / q) / k.sqrt())
}

/// `Gamma(x)` for positive multiples of 1/2.
fn gamma_half_integer(x: f64) -> f64 {
    let mut v = if (x.fract()).abs() < 1e-12 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut y = if (x.fract()).abs() < 1e-12 { 1.0 } else { 0.5 };
    while y < x - 1e-12 {
        v *= y;
        y += 1.0;
    }
    v
}

/// Best constant `C_d` in `||u||_{L^q} <= C_d ||grad u||_{L^2}` on `R^d`,
/// attained by the ground-state orbit.
pub fn sharp_sobolev_constant(dim: Dimension) -> f64 {
    let d = dim.get() as f64;
    let ratio = gamma_half_integer(d) / gamma_half_integer(0.5 * d);
    (std::f64::consts::PI * d * (d - 2.0)).powf(-0.5) * ratio.powf(1.0 / d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert_eq!(critical_exponent(6).unwrap(), 2.0);
        assert_eq!(critical_exponent(10).unwrap(), 1.5);
        assert!(matches!(critical_exponent(2), Err(Error::InvalidDimension { d: 2 })));
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        let s = |d| Dimension::new(d).unwrap().sphere_area();
        assert!((s(3) - 4.0 * PI).abs() < 1e-13);
        assert!((s(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((s(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((s(6) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn sharp_constant_small_dimensions() {
        use std::f64::consts::PI;
        // Gamma(3) / Gamma(3/2) = 4 / sqrt(pi)
        let c3 = (3.0 * PI).powf(-0.5) * (4.0 / PI.sqrt()).powf(1.0 / 3.0);
        assert!((sharp_sobolev_constant(Dimension::new(3).unwrap()) - c3).abs() < 1e-15);
        let c6 = (24.0 * PI).powf(-0.5) * 60f64.powf(1.0 / 6.0);
        assert!((sharp_sobolev_constant(Dimension::new(6).unwrap()) - c6).abs() < 1e-15);
    }

    #[test]
    fn w_values() {
        let d6 = Dimension::new(6).unwrap();
        assert_eq!(eval_w(d6, 0.0), 1.0);
        assert!((eval_w(d6, 24f64.sqrt()) - 0.25).abs() < 1e-15);
        let h = 1e-5;
        let fd = (eval_w(d6, 2.0 + h) - eval_w(d6, 2.0 - h)) / (2.0 * h);
        assert!((fd - eval_w_prime(d6, 2.0)).abs() < 1e-9);
    }

    #[test]
    fn identity_symmetry_is_exact() {
        let g = RadialGrid::new(6, 10.0, 100).unwrap();
        let w = GroundState::closed_form(&g).field(&g);
        let same = apply_symmetry(&w, SymmetryParams::IDENTITY, &g).unwrap();
        assert_eq!(same, w);
    }

    #[test]
    fn scale_outside_domain_is_rejected() {
        let g = RadialGrid::new(6, 10.0, 100).unwrap();
        let w = GroundState::closed_form(&g).field(&g);
        let s = SymmetryParams { theta: 0.0, mu: 1e3 };
        assert!(matches!(apply_symmetry(&w, s, &g), Err(Error::ScaleOutOfDomain { .. })));
    }
}
