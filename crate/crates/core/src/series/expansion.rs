use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients of `P(z) = (1+z)^{(p+1)/2} (1+conj z)^{(p-1)/2}`
/// `= sum a_{j1,j2} z^{j1} conj(z)^{j2}` for `j1 + j2 <= j_max`.
///
/// Each coefficient factors as `binom((p+1)/2, j1) binom((p-1)/2, j2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTable {
    p: f64,
    j_max: usize,
    coeffs: Vec<Vec<f64>>,
}

/// Generalized binomial coefficient `alpha choose k`.
pub fn binomial(alpha: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (alpha - i as f64) / (i as f64 + 1.0))
}

pub fn pz_coefficients(p: f64, j_max: usize) -> Result<ExpansionTable> {
    ExpansionTable::new(p, j_max)
}

impl ExpansionTable {
    pub fn new(p: f64, j_max: usize) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::param("p", format!("need p > 1, got {p}")));
        }
        let hi: Vec<f64> = (0..=j_max).map(|k| binomial(0.5 * (p + 1.0), k)).collect();
        let lo: Vec<f64> = (0..=j_max).map(|k| binomial(0.5 * (p - 1.0), k)).collect();
        let coeffs = (0..=j_max)
            .map(|j1| (0..=j_max - j1).map(|j2| hi[j1] * lo[j2]).collect())
            .collect();
        Ok(ExpansionTable { p, j_max, coeffs })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// `a_{j1,j2}`; zero outside the table.
    pub fn get(&self, j1: usize, j2: usize) -> f64 {
        if j1 + j2 > self.j_max {
            0.0
        } else {
            self.coeffs[j1][j2]
        }
    }

    /// Truncated series `sum_{j1+j2 <= j_max} a z^j1 conj(z)^j2`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zc = z.conj();
        let mut total = Complex64::new(0.0, 0.0);
        let mut zp = Complex64::new(1.0, 0.0);
        for j1 in 0..=self.j_max {
            let mut zcp = Complex64::new(1.0, 0.0);
            for j2 in 0..=self.j_max - j1 {
                total += zp * zcp * self.coeffs[j1][j2];
                zcp *= zc;
            }
            zp *= z;
        }
        total
    }
}

/// Closed form of `P(z)`.
pub fn p_of_z(p: f64, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    (one + z).powf(0.5 * (p + 1.0)) * (one + z.conj()).powf(0.5 * (p - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_dimensional_quadratic_terms() {
        let t = ExpansionTable::new(2.0, 4).unwrap();
        assert!((t.get(2, 0) - 3.0 / 8.0).abs() < 1e-15);
        assert!((t.get(1, 1) - 3.0 / 4.0).abs() < 1e-15);
        assert!((t.get(0, 2) + 1.0 / 8.0).abs() < 1e-15);
        assert_eq!(t.get(0, 0), 1.0);
        assert_eq!(t.get(3, 2), 0.0);
    }

    #[test]
    fn truncated_series_converges_for_small_z() {
        let t = ExpansionTable::new(7.0 / 3.0, 14).unwrap();
        let z = Complex64::new(0.1, -0.05);
        let err = (t.eval(z) - p_of_z(t.p(), z)).norm();
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn rejects_subcritical_p() {
        assert!(ExpansionTable::new(1.0, 3).is_err());
    }
}
