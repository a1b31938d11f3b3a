use num_complex::Complex64;

use super::field::RadialField;
use super::grid::RadialGrid;
use crate::error::{Error, Result};

/// Vertex-centred finite-volume radial Laplacian `Delta_h = -M^{-1} A`.
///
/// `M = diag(volumes)` and `A` is the symmetric tridiagonal stiffness matrix
/// built from the face couplings. The outer node carries a Robin closure whose
/// coefficient is chosen so that the discrete ground state (see
/// [`march_profile`]) satisfies the boundary row exactly; for decaying
/// profiles this mimics the exterior tail instead of pinning `u(R) = 0`.
#[derive(Debug, Clone)]
pub struct DiscreteLaplacian {
    couplings: Vec<f64>,
    volumes: Vec<f64>,
    closure: f64,
}

impl DiscreteLaplacian {
    pub fn new(grid: &RadialGrid) -> Result<Self> {
        let u = march_profile(grid);
        let n = grid.n();
        let c = grid.couplings();
        let v = grid.volumes();
        let p = grid.dim().critical_exponent();
        if !(u[n] > 0.0 && u.iter().all(|x| x.is_finite())) {
            return Err(Error::param(
                "n",
                format!("grid too coarse: discrete ground state is not positive (u(R) = {:.3e})", u[n]),
            ));
        }
        let closure = (c[n - 1] * (u[n - 1] - u[n]) + v[n] * u[n].powf(p)) / u[n];
        Ok(DiscreteLaplacian {
            couplings: c.to_vec(),
            volumes: v.to_vec(),
            closure,
        })
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    pub fn closure(&self) -> f64 {
        self.closure
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Diagonal of the stiffness matrix `A`.
    pub fn stiffness_diag(&self) -> Vec<f64> {
        let n = self.len() - 1;
        let c = &self.couplings;
        (0..=n)
            .map(|i| {
                let left = if i > 0 { c[i - 1] } else { 0.0 };
                let right = if i < n { c[i] } else { self.closure };
                left + right
            })
            .collect()
    }

    /// Off-diagonal of `A` (entry `(i, i+1)`), length `n`.
    pub fn stiffness_off(&self) -> Vec<f64> {
        self.couplings.iter().map(|c| -c).collect()
    }

    /// Rows of `Delta_h` as (sub, diag, super) diagonals.
    pub fn tridiagonal(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let diag = self.stiffness_diag();
        let n = self.len() - 1;
        let v = &self.volumes;
        let c = &self.couplings;
        let sub = (1..=n).map(|i| c[i - 1] / v[i]).collect();
        let sup = (0..n).map(|i| c[i] / v[i]).collect();
        let dg = diag.iter().zip(v).map(|(a, m)| -a / m).collect();
        (sub, dg, sup)
    }

    /// `M^{1/2} Delta_h M^{-1/2}`: symmetric tridiagonal (diag, off).
    pub fn symmetrized(&self) -> (Vec<f64>, Vec<f64>) {
        let v = &self.volumes;
        let diag = self
            .stiffness_diag()
            .iter()
            .zip(v)
            .map(|(a, m)| -a / m)
            .collect();
        let off = self
            .couplings
            .iter()
            .enumerate()
            .map(|(i, c)| c / (v[i] * v[i + 1]).sqrt())
            .collect();
        (diag, off)
    }

    pub fn apply_real(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_generic(u, &mut out);
        out
    }

    pub fn apply_complex(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
        self.apply_generic(u, &mut out);
        out
    }

    /// `Delta_h u`.
    pub fn apply(&self, u: &RadialField) -> Result<RadialField> {
        if u.len() != self.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} samples, operator {}",
                u.len(),
                self.len()
            )));
        }
        Ok(u.with_values(self.apply_complex(u.values())))
    }

    fn apply_generic<T>(&self, u: &[T], out: &mut [T])
    where
        T: Copy
            + std::ops::Sub<Output = T>
            + std::ops::Mul<f64, Output = T>
            + std::ops::Add<Output = T>,
    {
        let n = self.len() - 1;
        let c = &self.couplings;
        let v = &self.volumes;
        out[0] = (u[1] - u[0]) * (c[0] / v[0]);
        for i in 1..n {
            out[i] = ((u[i + 1] - u[i]) * c[i] + (u[i - 1] - u[i]) * c[i - 1]) * (1.0 / v[i]);
        }
        out[n] = ((u[n - 1] - u[n]) * c[n - 1] + u[n] * (-self.closure)) * (1.0 / v[n]);
    }

    /// Discrete Dirichlet form `<u, A u>`.
    pub fn dirichlet_form(&self, u: &[Complex64]) -> f64 {
        let n = self.len() - 1;
        let mut s = 0.0;
        for i in 0..n {
            s += self.couplings[i] * (u[i + 1] - u[i]).norm_sqr();
        }
        s + self.closure * u[n].norm_sqr()
    }

    /// Mass `sum V_i |u_i|^2` in the operator inner product.
    pub fn mass(&self, u: &[Complex64]) -> f64 {
        u.iter().zip(&self.volumes).map(|(z, v)| v * z.norm_sqr()).sum()
    }

    /// Operator inner product `sum V_i a_i b_i` of real vectors.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.volumes)
            .map(|((x, y), v)| x * y * v)
            .sum()
    }
}

/// Discrete ground state of `Delta_h U + U^p = 0` with `U(0) = 1`, obtained
/// by marching the finite-volume balance outward one cell at a time.
pub fn march_profile(grid: &RadialGrid) -> Vec<f64> {
    let n = grid.n();
    let c = grid.couplings();
    let v = grid.volumes();
    let p = grid.dim().critical_exponent();
    let mut u = vec![0.0f64; n + 1];
    u[0] = 1.0f64;
    u[1] = u[0] - v[0] * u[0].powf(p) / c[0];
    for i in 1..n {
        let src = v[i] * u[i].abs().powf(p - 1.0) * u[i];
        u[i + 1] = u[i] + (c[i - 1] * (u[i] - u[i - 1]) - src) / c[i];
    }
    u
}
