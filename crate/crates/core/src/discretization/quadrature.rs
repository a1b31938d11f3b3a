//! Gauss-Legendre rules and the exterior-tail integrals of the ground state.

use crate::ground_state::{eval_w, eval_w_prime, Dimension};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let m = order;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre quadrature of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let mid = lo + 0.5 * width;
        for (xi, wi) in x.iter().zip(&w) {
            sum += wi * f(mid + 0.5 * width * xi);
        }
    }
    0.5 * width * sum
}

/// Exterior contributions of the ground-state profile beyond `r_max`, per unit
/// boundary amplitude: `kinetic * |u(R)|^2` and `potential * |u(R)|^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExteriorTail {
    pub kinetic: f64,
    pub potential: f64,
}

impl ExteriorTail {
    pub fn new(dim: Dimension, r_max: f64) -> Self {
        let d = dim.get() as f64;
        let q = dim.energy_exponent();
        let omega = dim.sphere_area();
        // r = R / x maps (R, inf) onto (0, 1]
        let over = |g: &dyn Fn(f64) -> f64| {
            integrate(
                |x: f64| {
                    if x <= 0.0 {
                        return 0.0;
                    }
                    let r = r_max / x;
                    g(r) * r_max / (x * x)
                },
                0.0,
                1.0,
                8,
                32,
            )
        };
        let w_r = eval_w(dim, r_max);
        let kin = over(&|r| eval_w_prime(dim, r).powi(2) * r.powf(d - 1.0));
        let pot = over(&|r| eval_w(dim, r).powf(q) * r.powf(d - 1.0));
        ExteriorTail {
            kinetic: omega * kin / (w_r * w_r),
            potential: omega * pot / w_r.powf(q),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m18: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((m18 - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_on_exponential() {
        let v = integrate(f64::exp, 0.0, 2.0, 3, 12);
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-13);
    }
}
