//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub const D: u32 = 6;
pub const R_MAX: f64 = 60.0;
pub const N: usize = 6000;

pub fn w_exact(d: u32, r: f64) -> f64 {
    let d = d as f64;
    (1.0 + r * r / (d * (d - 2.0))).powf(-(d - 2.0) / 2.0)
}

pub fn w_exact_prime(d: u32, r: f64) -> f64 {
    let df = d as f64;
    -(r / df) * (1.0 + r * r / (df * (df - 2.0))).powf(-df / 2.0)
}

/// Lanczos approximation (g = 7, 9 terms), good to ~1e-15 for x > 0.5.
pub fn gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

pub fn sphere_area(d: u32) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

pub fn sharp_constant(d: u32) -> f64 {
    let df = d as f64;
    (PI * df * (df - 2.0)).powf(-0.5) * (gamma(df) / gamma(df / 2.0)).powf(1.0 / df)
}

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || b - a < 1e-9 {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `|S^{d-1}| int_0^inf f(r) r^{d-1} dr`, mapped to `s in [0, 1)` by `r = s / (1 - s)`.
pub fn radial_integral<F: Fn(f64) -> f64>(d: u32, f: F) -> f64 {
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let r = s / (1.0 - s);
        f(r) * r.powi(d as i32 - 1) / (1.0 - s).powi(2)
    };
    sphere_area(d) * adaptive_simpson(g, 0.0, 1.0, 1e-12)
}

/// `||grad W||^2` on `R^d`.
pub fn w_kinetic(d: u32) -> f64 {
    radial_integral(d, |r| w_exact_prime(d, r).powi(2))
}

/// `||W||_q^q` on `R^d`.
pub fn w_potential(d: u32) -> f64 {
    let q = 2.0 * d as f64 / (d as f64 - 2.0);
    radial_integral(d, |r| w_exact(d, r).powf(q))
}

/// Taylor coefficient `[z^j1 w^j2] (1+z)^{(p+1)/2} (1+w)^{(p-1)/2}` by the
/// trapezoid rule on a torus of radius `rho`.
pub fn pz_coefficient_cauchy(p: f64, j1: usize, j2: usize) -> f64 {
    let rho = 0.5;
    let m = 64;
    let one = Complex64::new(1.0, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    for a in 0..m {
        let phi = 2.0 * PI * a as f64 / m as f64;
        let z = Complex64::from_polar(rho, phi);
        let fz = (one + z).powf(0.5 * (p + 1.0)) * Complex64::from_polar(1.0, -(j1 as f64) * phi);
        for b in 0..m {
            let psi = 2.0 * PI * b as f64 / m as f64;
            let w = Complex64::from_polar(rho, psi);
            s += fz * (one + w).powf(0.5 * (p - 1.0)) * Complex64::from_polar(1.0, -(j2 as f64) * psi);
        }
    }
    (s / (m * m) as f64).re / rho.powi((j1 + j2) as i32)
}

fn compositions(total: usize, parts: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 0 {
        if total == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    for first in 1..=max_part.min(total) {
        prefix.push(first);
        compositions(total - first, parts - 1, max_part, prefix, out);
        prefix.pop();
    }
}

/// `F_j` at a single point by brute-force enumeration of every ordered tuple
/// of orders: `sum a_{j1,j2} W^{p-j1-j2} prod phi_{m_i} prod conj(phi_{n_i})`
/// with `sum m + sum n = j`. `phi[m - 1]` holds `Phi_m(r)`.
pub fn forcing_brute_force(j: usize, phi: &[Complex64], w: f64, p: f64, coeff: impl Fn(usize, usize) -> f64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    let max_part = j - 1;
    for j1 in 0..=j {
        for j2 in 0..=j - j1 {
            if j1 + j2 < 2 {
                continue;
            }
            for split in 0..=j {
                let mut left = Vec::new();
                let mut right = Vec::new();
                compositions(split, j1, max_part, &mut Vec::new(), &mut left);
                compositions(j - split, j2, max_part, &mut Vec::new(), &mut right);
                for l in &left {
                    let a: Complex64 = l.iter().map(|&m| phi[m - 1]).product();
                    for r in &right {
                        let b: Complex64 = r.iter().map(|&m| phi[m - 1].conj()).product();
                        total += a * b * coeff(j1, j2) * w.powf(p - (j1 + j2) as f64);
                    }
                }
            }
        }
    }
    total
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Trapezoid `int_0^R |f|^2 r^{d-1} dr` on a uniform grid, excluding the last
/// `skip` nodes.
pub fn weighted_l2(values: &[Complex64], h: f64, d: u32, skip: usize) -> f64 {
    let n = values.len() - skip;
    let mut s = 0.0;
    for (i, v) in values[..n].iter().enumerate() {
        let r = i as f64 * h;
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        s += w * v.norm_sqr() * r.powi(d as i32 - 1);
    }
    (s * h).sqrt()
}
