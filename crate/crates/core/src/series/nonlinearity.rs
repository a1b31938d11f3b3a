use num_complex::Complex64;

use crate::discretization::RadialField;
use crate::error::{Error, Result};

fn check(v: &RadialField, base: &[f64]) -> Result<()> {
    if v.len() == base.len() {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "perturbation has {} samples, base {}",
            v.len(),
            base.len()
        )))
    }
}

/// Linear part `Gamma(v) = (p+1)/2 W^{p-1} v + (p-1)/2 W^{p-1} conj(v)`.
pub fn eval_gamma(v: &RadialField, base: &[f64], p: f64) -> Result<RadialField> {
    check(v, base)?;
    let vals = v
        .values()
        .iter()
        .zip(base)
        .map(|(z, w)| {
            let wp = w.abs().powf(p - 1.0);
            z * (0.5 * (p + 1.0) * wp) + z.conj() * (0.5 * (p - 1.0) * wp)
        })
        .collect();
    Ok(v.with_values(vals))
}

/// `i R(v) = |W + v|^{p-1} (W + v) - W^p - Gamma(v)`, evaluated directly.
pub fn eval_ir(v: &RadialField, base: &[f64], p: f64) -> Result<RadialField> {
    check(v, base)?;
    let vals = v
        .values()
        .iter()
        .zip(base)
        .map(|(z, &w)| {
            let u = z + w;
            let wp = w.abs().powf(p - 1.0);
            let gamma = z * (0.5 * (p + 1.0) * wp) + z.conj() * (0.5 * (p - 1.0) * wp);
            u * u.norm().powf(p - 1.0) - wp * w - gamma
        })
        .collect();
    Ok(v.with_values(vals))
}

/// `R(v)`, the nonlinear remainder itself.
pub fn eval_r(v: &RadialField, base: &[f64], p: f64) -> Result<RadialField> {
    Ok(eval_ir(v, base, p)?.scale(Complex64::new(0.0, -1.0)))
}
