//! Quadrature-based integrals and norms on a [`RadialGrid`].
//!
//! Derivatives use fourth-order central differences with parity ghosts at the
//! origin and one-sided fourth-order stencils at the last two nodes.

use num_complex::Complex64;

use super::field::RadialField;
use super::grid::RadialGrid;
use crate::error::{Error, Result};

/// Parity of a radial function under `r -> -r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// First radial derivative of sampled values.
pub fn radial_derivative(u: &[Complex64], h: f64, parity: Parity) -> Vec<Complex64> {
    let n = u.len() - 1;
    let s = parity.sign();
    let at = |k: isize| -> Complex64 {
        if k < 0 {
            u[(-k) as usize] * s
        } else {
            u[k as usize]
        }
    };
    let inv = 1.0 / (12.0 * h);
    let mut du = vec![Complex64::new(0.0, 0.0); n + 1];
    for (i, slot) in du.iter_mut().enumerate().take(n - 1) {
        let i = i as isize;
        *slot = (at(i - 2) - at(i - 1) * 8.0 + at(i + 1) * 8.0 - at(i + 2)) * inv;
    }
    du[n - 1] = (u[n] * 3.0 + u[n - 1] * 10.0 - u[n - 2] * 18.0 + u[n - 3] * 6.0 - u[n - 4]) * inv;
    du[n] = (u[n] * 25.0 - u[n - 1] * 48.0 + u[n - 2] * 36.0 - u[n - 3] * 16.0 + u[n - 4] * 3.0)
        * inv;
    du
}

/// `j`-th radial derivative of an even radial function.
pub fn nth_derivative(u: &[Complex64], h: f64, j: usize) -> Vec<Complex64> {
    let mut out = u.to_vec();
    let mut parity = Parity::Even;
    for _ in 0..j {
        out = radial_derivative(&out, h, parity);
        parity = parity.flip();
    }
    out
}

fn finite(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Quadrature of a real radial function over the ball `|x| <= r_max`.
pub fn integrate(u: &[f64], grid: &RadialGrid) -> Result<f64> {
    if u.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples for {} nodes",
            u.len(),
            grid.len()
        )));
    }
    finite(
        u.iter().zip(grid.weights()).map(|(a, w)| a * w).sum(),
        "integrate",
    )
}

/// `||u||_{L^2(B_R)}`.
pub fn l2_norm(u: &RadialField, grid: &RadialGrid) -> Result<f64> {
    grid.check(u.spec())?;
    let s: f64 = u
        .values()
        .iter()
        .zip(grid.weights())
        .map(|(z, w)| w * z.norm_sqr())
        .sum();
    finite(s.sqrt(), "l2_norm")
}

/// `int |grad u|^2` including the exterior tail of the ground-state profile.
pub fn dirichlet_integral(u: &RadialField, grid: &RadialGrid) -> Result<f64> {
    grid.check(u.spec())?;
    let du = radial_derivative(u.values(), grid.h(), Parity::Even);
    let interior: f64 = du
        .iter()
        .zip(grid.weights())
        .map(|(z, w)| w * z.norm_sqr())
        .sum();
    let edge = u.values()[grid.n()].norm_sqr();
    finite(interior + grid.tail().kinetic * edge, "dirichlet_integral")
}

/// `int |u|^q` for the energy-critical `q = 2d/(d-2)`, with exterior tail.
pub fn critical_lq_integral(u: &RadialField, grid: &RadialGrid) -> Result<f64> {
    grid.check(u.spec())?;
    let q = grid.dim().energy_exponent();
    let interior: f64 = u
        .values()
        .iter()
        .zip(grid.weights())
        .map(|(z, w)| w * z.norm_sqr().powf(0.5 * q))
        .sum();
    let edge = u.values()[grid.n()].norm().powf(q);
    finite(interior + grid.tail().potential * edge, "critical_lq_integral")
}

/// Homogeneous Sobolev inner product `<f, g>` (complex, antilinear in `f`),
/// given precomputed radial derivatives.
pub fn h1_inner_from_derivatives(
    df: &[Complex64],
    dg: &[Complex64],
    f_edge: Complex64,
    g_edge: Complex64,
    grid: &RadialGrid,
) -> Complex64 {
    let s: Complex64 = df
        .iter()
        .zip(dg)
        .zip(grid.weights())
        .map(|((a, b), w)| a.conj() * b * *w)
        .sum();
    s + f_edge.conj() * g_edge * grid.tail().kinetic
}

/// `||grad (u - v)||_{L^2}`.
pub fn h1_distance(u: &RadialField, v: &RadialField, grid: &RadialGrid) -> Result<f64> {
    let diff = u.sub(v)?;
    Ok(dirichlet_integral(&diff, grid)?.sqrt())
}

fn bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

/// `sum_{j <= m} || <r>^(m-j) d_r^j u ||_{L^2(B_R)}` for `m <= m_max`.
pub fn hmm_norm(u: &RadialField, m: usize, grid: &RadialGrid, m_max: usize) -> Result<f64> {
    grid.check(u.spec())?;
    if m > m_max {
        return Err(Error::param("m", format!("{m} exceeds m_max = {m_max}")));
    }
    let mut total = 0.0;
    let mut dj = u.values().to_vec();
    let mut parity = Parity::Even;
    for j in 0..=m {
        if j > 0 {
            dj = radial_derivative(&dj, grid.h(), parity);
            parity = parity.flip();
        }
        let s: f64 = dj
            .iter()
            .zip(grid.nodes())
            .zip(grid.weights())
            .map(|((z, &r), w)| w * bracket(r).powi(2 * (m - j) as i32) * z.norm_sqr())
            .sum();
        total += s.sqrt();
    }
    finite(total, "hmm_norm")
}

/// `max_r <r>^j |d_r^m_der u|` for `m_der <= 2`.
pub fn weighted_sup_norm(u: &RadialField, j: i32, m_der: usize, grid: &RadialGrid) -> Result<f64> {
    grid.check(u.spec())?;
    if m_der > 2 {
        return Err(Error::param("m_der", format!("{m_der} > 2")));
    }
    let du = nth_derivative(u.values(), grid.h(), m_der);
    let m = du
        .iter()
        .zip(grid.nodes())
        .fold(0.0f64, |acc, (z, &r)| acc.max(bracket(r).powi(j) * z.norm()));
    finite(m, "weighted_sup_norm")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &RadialGrid) -> RadialField {
        RadialField::from_fn(grid, |r| Complex64::new((-r * r).exp(), 0.0))
    }

    #[test]
    fn derivative_is_fourth_order() {
        let err = |n: usize| {
            let g = RadialGrid::new(3, 6.0, n).unwrap();
            let u = gaussian(&g);
            let du = radial_derivative(u.values(), g.h(), Parity::Even);
            du.iter()
                .zip(g.nodes())
                .map(|(z, r)| (z.re + 2.0 * r * (-r * r).exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(200) / err(400);
        assert!(ratio > 12.0, "{ratio}");
    }

    #[test]
    fn gaussian_dirichlet_integral_in_three_dimensions() {
        // int |grad e^{-r^2}|^2 dx = 3 pi^{3/2} / (2 sqrt 2) in R^3
        let g = RadialGrid::new(3, 8.0, 800).unwrap();
        let k = dirichlet_integral(&gaussian(&g), &g).unwrap();
        let exact = 3.0 * std::f64::consts::PI.powf(1.5) / (2.0 * 2f64.sqrt());
        assert!((k / exact - 1.0).abs() < 1e-8, "{k} {exact}");
    }

    #[test]
    fn hmm_norm_rejects_large_order() {
        let g = RadialGrid::new(3, 8.0, 64).unwrap();
        assert!(hmm_norm(&gaussian(&g), 5, &g, 4).is_err());
    }
}
