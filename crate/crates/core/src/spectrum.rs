//! Linearization around the ground state and its unstable eigenpair.
//!
//! Writing `v = v1 + i v2`, the linearized flow is `d/dt (v1, v2) = (L- v2, -L+ v1)`
//! with `L+ = Delta + p W^{p-1}` and `L- = Delta + W^{p-1}`. The unstable mode
//! `e^{e0 t} (y1 + i y2)` solves `L- y2 = e0 y1`, `-L+ y1 = e0 y2`, so that
//! `L- L+ y1 = -e0^2 y1`.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::banded::BandedMatrix;
use crate::discretization::interp::{MonotoneCubic, Tail};
use crate::discretization::{DiscreteLaplacian, GridSpec, RadialField, RadialGrid};
use crate::error::{Error, Result};
use crate::ground_state::kinetic_norm;
use crate::problem::RadialProblem;

/// The operators `L+` and `L-` on a grid, for a given base profile.
#[derive(Debug, Clone)]
pub struct LinearizedBlocks {
    spec: GridSpec,
    laplacian: DiscreteLaplacian,
    base: Vec<f64>,
    v_plus: Vec<f64>,
    v_minus: Vec<f64>,
    p: f64,
}

/// Blocks linearized around the problem's ground state.
pub fn build_blocks(problem: &RadialProblem) -> LinearizedBlocks {
    LinearizedBlocks::from_profile(problem, problem.ground.values().to_vec())
}

impl LinearizedBlocks {
    /// Blocks linearized around an arbitrary nonnegative profile.
    pub fn from_profile(problem: &RadialProblem, base: Vec<f64>) -> Self {
        let p = problem.grid.dim().critical_exponent();
        let v_minus: Vec<f64> = base.iter().map(|w| w.abs().powf(p - 1.0)).collect();
        let v_plus = v_minus.iter().map(|v| p * v).collect();
        LinearizedBlocks {
            spec: problem.grid.spec(),
            laplacian: problem.laplacian.clone(),
            base,
            v_plus,
            v_minus,
            p,
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn laplacian(&self) -> &DiscreteLaplacian {
        &self.laplacian
    }

    /// `W^{p-1}`.
    pub fn potential_minus(&self) -> &[f64] {
        &self.v_minus
    }

    pub fn apply_plus(&self, y: &[f64]) -> Vec<f64> {
        let mut out = self.laplacian.apply_real(y);
        for ((o, v), y) in out.iter_mut().zip(&self.v_plus).zip(y) {
            *o += v * y;
        }
        out
    }

    pub fn apply_minus(&self, y: &[f64]) -> Vec<f64> {
        let mut out = self.laplacian.apply_real(y);
        for ((o, v), y) in out.iter_mut().zip(&self.v_minus).zip(y) {
            *o += v * y;
        }
        out
    }

    /// `(L- y2, -L+ y1)`.
    pub fn apply_block(&self, y1: &[f64], y2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let a = self.apply_minus(y2);
        let b = self.apply_plus(y1).into_iter().map(|x| -x).collect();
        (a, b)
    }

    /// Banded form of `(L - shift I)` with unknowns interleaved as
    /// `(y1_0, y2_0, y1_1, y2_1, ...)`.
    pub fn block_matrix(&self, shift: f64) -> BandedMatrix {
        let n = self.len();
        let (sub, diag, sup) = self.laplacian.tridiagonal();
        let mut m = BandedMatrix::zeros(2 * n, 3, 3);
        for i in 0..n {
            let (r1, r2) = (2 * i, 2 * i + 1);
            // row r1: (L- y2)_i - shift y1_i
            m.add(r1, r1, -shift);
            m.add(r1, 2 * i + 1, diag[i] + self.v_minus[i]);
            // row r2: -(L+ y1)_i - shift y2_i
            m.add(r2, r2, -shift);
            m.add(r2, 2 * i, -(diag[i] + self.v_plus[i]));
            if i > 0 {
                m.add(r1, 2 * (i - 1) + 1, sub[i - 1]);
                m.add(r2, 2 * (i - 1), -sub[i - 1]);
            }
            if i + 1 < n {
                m.add(r1, 2 * (i + 1) + 1, sup[i]);
                m.add(r2, 2 * (i + 1), -sup[i]);
            }
        }
        m
    }

    /// Banded form of `L- L+ + shift I` (pentadiagonal).
    pub fn composition_matrix(&self, shift: f64) -> BandedMatrix {
        let n = self.len();
        let (sub, diag, sup) = self.laplacian.tridiagonal();
        let row = |v: &[f64], i: usize| -> [(isize, f64); 3] {
            [
                (-1, if i > 0 { sub[i - 1] } else { 0.0 }),
                (0, diag[i] + v[i]),
                (1, if i + 1 < n { sup[i] } else { 0.0 }),
            ]
        };
        let mut m = BandedMatrix::zeros(n, 2, 2);
        for i in 0..n {
            m.add(i, i, shift);
            for (di, a) in row(&self.v_minus, i) {
                let k = i as isize + di;
                if a == 0.0 || k < 0 || k >= n as isize {
                    continue;
                }
                let k = k as usize;
                for (dk, b) in row(&self.v_plus, k) {
                    let j = k as isize + dk;
                    if b == 0.0 || j < 0 || j >= n as isize {
                        continue;
                    }
                    m.add(i, j as usize, a * b);
                }
            }
        }
        m
    }
}

/// The unstable eigenpair `(e0, Y+ = y1 + i y2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub e0: f64,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    spec: GridSpec,
}

impl EigenPair {
    pub fn new(e0: f64, y1: Vec<f64>, y2: Vec<f64>, spec: GridSpec) -> Self {
        EigenPair { e0, y1, y2, spec }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    /// `Y+ = y1 + i y2`, growing like `e^{e0 t}`.
    pub fn y_plus(&self, grid: &RadialGrid) -> Result<RadialField> {
        grid.check(self.spec)?;
        RadialField::from_parts(grid, &self.y1, &self.y2)
    }

    /// `Y- = conj(Y+)`, the decaying mode.
    pub fn y_minus(&self, grid: &RadialGrid) -> Result<RadialField> {
        Ok(self.y_plus(grid)?.conj())
    }

    /// The pair `(-e0, Y-)`.
    pub fn decaying(&self) -> EigenPair {
        EigenPair {
            e0: -self.e0,
            y1: self.y1.clone(),
            y2: self.y2.iter().map(|x| -x).collect(),
            spec: self.spec,
        }
    }
}

/// Controls for [`ground_mode`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigenOptions {
    /// Interval count of the dense coarse sweep that supplies the shift.
    pub coarse_n: usize,
    /// Convergence tolerance of the inverse iterations (max-norm change).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            coarse_n: 400,
            tol: 1e-12,
            max_iter: 60,
        }
    }
}

/// Estimate of `e0` from a dense symmetric eigensolve on a coarse grid.
pub fn coarse_estimate(problem: &RadialProblem, blocks: &LinearizedBlocks, coarse_n: usize) -> Result<f64> {
    let grid = &problem.grid;
    let coarse = RadialProblem::new(grid.d(), grid.r_max(), coarse_n, problem.ground.kind())?;
    let profile = MonotoneCubic::new(grid.h(), blocks.base(), Tail::Zero);
    let base: Vec<f64> = coarse.grid.nodes().iter().map(|&r| profile.eval(r)).collect();
    let cb = LinearizedBlocks::from_profile(&coarse, base);
    let (diag, off) = coarse.laplacian.symmetrized();
    let n = diag.len();
    let sym = |v: &[f64]| {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = -(diag[i] + v[i]);
            if i + 1 < n {
                m[(i, i + 1)] = -off[i];
                m[(i + 1, i)] = -off[i];
            }
        }
        m
    };
    // B = -L- (nonnegative up to the ground-state direction), C = B^{1/2} (-L+) B^{1/2}
    let b = SymmetricEigen::new(sym(&cb.v_minus));
    let sqrt_vals = b.eigenvalues.map(|x| x.max(0.0).sqrt());
    let half = &b.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * b.eigenvectors.transpose();
    let c = &half * sym(&cb.v_plus) * &half;
    let c = (&c + c.transpose()) * 0.5;
    let smallest = SymmetricEigen::new(c).eigenvalues.min();
    let scale = diag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(smallest < -1e-10 * scale * scale) {
        return Err(Error::NoNegativeEigenvalue { smallest });
    }
    Ok((-smallest).sqrt())
}

fn normalize_max(x: &mut [f64]) -> f64 {
    let (mut k, mut m) = (0, 0.0f64);
    for (i, v) in x.iter().enumerate() {
        if v.abs() > m {
            m = v.abs();
            k = i;
        }
    }
    let s = x[k];
    for v in x.iter_mut() {
        *v /= s;
    }
    m
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Computes the unstable eigenpair, normalized so that
/// `||grad Y+||_{L^2} = 1` and `y1(0) > 0`.
///
/// A dense sweep on a coarse grid gives the shift; inverse iteration on the
/// composed operator `L- L+` refines `y1`, and a final inverse iteration on
/// the full block system settles both components together.
pub fn ground_mode(problem: &RadialProblem, blocks: &LinearizedBlocks, opts: &EigenOptions) -> Result<EigenPair> {
    problem.grid.check(blocks.spec)?;
    let n = blocks.len();
    let e_coarse = coarse_estimate(problem, blocks, opts.coarse_n)?;

    let comp = blocks.composition_matrix(e_coarse * e_coarse).factor()?;
    let mut y1 = blocks.base().to_vec();
    normalize_max(&mut y1);
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let mut z = comp.solve(&y1);
        normalize_max(&mut z);
        change = max_diff(&z, &y1);
        y1 = z;
        if change < 1e-9 {
            break;
        }
    }
    if !(change < 1e-6) {
        return Err(Error::NotConverged {
            what: "composition inverse iteration",
            iterations: opts.max_iter,
            residual: change,
        });
    }
    let lap = blocks.laplacian();
    let ty = blocks.apply_minus(&blocks.apply_plus(&y1));
    let e_sq = -lap.dot(&y1, &ty) / lap.dot(&y1, &y1);
    if !(e_sq > 0.0) {
        return Err(Error::NoNegativeEigenvalue { smallest: -e_sq });
    }
    let shift = e_sq.sqrt();

    let y2: Vec<f64> = blocks.apply_plus(&y1).iter().map(|x| -x / shift).collect();
    let mut x: Vec<f64> = (0..2 * n).map(|k| if k % 2 == 0 { y1[k / 2] } else { y2[k / 2] }).collect();
    normalize_max(&mut x);
    let block = blocks.block_matrix(shift).factor()?;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut z = block.solve(&x);
        normalize_max(&mut z);
        change = max_diff(&z, &x);
        x = z;
        if change < opts.tol {
            break;
        }
    }
    if !(change < opts.tol) {
        return Err(Error::NotConverged {
            what: "block inverse iteration",
            iterations,
            residual: change,
        });
    }
    let mut y1: Vec<f64> = x.iter().step_by(2).copied().collect();
    let mut y2: Vec<f64> = x.iter().skip(1).step_by(2).copied().collect();
    let (a, b) = blocks.apply_block(&y1, &y2);
    let e0 = (lap.dot(&y1, &a) + lap.dot(&y2, &b)) / (lap.dot(&y1, &y1) + lap.dot(&y2, &y2));

    let grid = &problem.grid;
    let norm = kinetic_norm(&RadialField::from_parts(grid, &y1, &y2)?, grid)?;
    let s = if y1[0] < 0.0 { -1.0 / norm } else { 1.0 / norm };
    y1.iter_mut().chain(y2.iter_mut()).for_each(|v| *v *= s);
    if !e0.is_finite() || y1.iter().chain(&y2).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ground_mode"));
    }
    Ok(EigenPair::new(e0, y1, y2, grid.spec()))
}

/// `||L Y - e0 Y|| / ||Y||` in the volume-weighted `L^2` norm.
pub fn eigen_residual(blocks: &LinearizedBlocks, pair: &EigenPair) -> Result<f64> {
    if blocks.spec != pair.spec {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", blocks.spec, pair.spec)));
    }
    let lap = blocks.laplacian();
    let (a, b) = blocks.apply_block(&pair.y1, &pair.y2);
    let r1: Vec<f64> = a.iter().zip(&pair.y1).map(|(x, y)| x - pair.e0 * y).collect();
    let r2: Vec<f64> = b.iter().zip(&pair.y2).map(|(x, y)| x - pair.e0 * y).collect();
    let num = lap.dot(&r1, &r1) + lap.dot(&r2, &r2);
    let den = lap.dot(&pair.y1, &pair.y1) + lap.dot(&pair.y2, &pair.y2);
    let r = (num / den).sqrt();
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFinite("eigen_residual"))
    }
}

/// JSON sidecar written next to the eigenfunction CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSidecar {
    pub d: u32,
    pub r_max: f64,
    pub n: usize,
    pub e0: f64,
    pub residual: f64,
    pub normalization: String,
}

pub const NORMALIZATION: &str = "kinetic_norm(y1 + i y2) = 1, y1(0) > 0";

/// Writes `Y+` as field CSV to `csv_path` and the sidecar to `json_path`.
pub fn export_eigenpair(
    pair: &EigenPair,
    residual: f64,
    grid: &RadialGrid,
    csv_path: &Path,
    json_path: &Path,
) -> Result<EigenSidecar> {
    pair.y_plus(grid)?.write_csv(csv_path)?;
    let spec = pair.spec;
    let side = EigenSidecar {
        d: spec.d,
        r_max: spec.r_max,
        n: spec.n,
        e0: pair.e0,
        residual,
        normalization: NORMALIZATION.into(),
    };
    std::fs::write(json_path, serde_json::to_vec_pretty(&side)?)?;
    Ok(side)
}

/// Reads an eigenpair written by [`export_eigenpair`].
pub fn import_eigenpair(csv_path: &Path, json_path: &Path) -> Result<(EigenPair, EigenSidecar)> {
    let field = RadialField::read_csv(csv_path)?;
    let side: EigenSidecar = serde_json::from_slice(&std::fs::read(json_path)?)?;
    let spec = field.spec();
    if spec.d != side.d || spec.n != side.n || spec.r_max != side.r_max {
        return Err(Error::GridMismatch(format!("csv {spec:?} vs sidecar {side:?}")));
    }
    let y: Vec<Complex64> = field.into_values();
    let pair = EigenPair::new(
        side.e0,
        y.iter().map(|z| z.re).collect(),
        y.iter().map(|z| z.im).collect(),
        spec,
    );
    Ok((pair, side))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (RadialProblem, LinearizedBlocks) {
        let p = RadialProblem::discrete(6, 30.0, 600).unwrap();
        let b = build_blocks(&p);
        (p, b)
    }

    #[test]
    fn block_matrix_matches_operator() {
        let (p, b) = small();
        let y1: Vec<f64> = p.grid.nodes().iter().map(|r| (-r * 0.3).exp()).collect();
        let y2: Vec<f64> = p.grid.nodes().iter().map(|r| 1.0 / (1.0 + r)).collect();
        let x: Vec<f64> = (0..2 * y1.len())
            .map(|k| if k % 2 == 0 { y1[k / 2] } else { y2[k / 2] })
            .collect();
        let mx = b.block_matrix(0.5).matvec(&x);
        let (a, c) = b.apply_block(&y1, &y2);
        for i in 0..y1.len() {
            assert!((mx[2 * i] - (a[i] - 0.5 * y1[i])).abs() < 1e-10);
            assert!((mx[2 * i + 1] - (c[i] - 0.5 * y2[i])).abs() < 1e-10);
        }
        let t = b.composition_matrix(0.25).matvec(&y1);
        let direct = b.apply_minus(&b.apply_plus(&y1));
        for i in 0..y1.len() {
            let e = (t[i] - direct[i] - 0.25 * y1[i]).abs();
            assert!(e < 1e-8, "{i} {e}");
        }
    }

    #[test]
    fn eigenpair_is_accurate_and_normalized() {
        let (p, b) = small();
        let pair = ground_mode(&p, &b, &EigenOptions::default()).unwrap();
        assert!(pair.e0 > 0.13 && pair.e0 < 0.15, "{}", pair.e0);
        assert!(eigen_residual(&b, &pair).unwrap() < 1e-9);
        let k = kinetic_norm(&pair.y_plus(&p.grid).unwrap(), &p.grid).unwrap();
        assert!((k - 1.0).abs() < 1e-12);
        assert!(pair.y1[0] > 0.0);
    }

    #[test]
    fn residual_detects_wrong_sign_and_value() {
        let (p, b) = small();
        let pair = ground_mode(&p, &b, &EigenOptions::default()).unwrap();
        let mut off = pair.clone();
        off.e0 += 1e-3;
        assert!(eigen_residual(&b, &off).unwrap() > 0.9e-3);
        let flipped = EigenPair::new(pair.e0, pair.y1.clone(), pair.y2.iter().map(|x| -x).collect(), pair.spec());
        assert!(eigen_residual(&b, &flipped).unwrap() > 0.1);
        assert!(eigen_residual(&b, &pair.decaying()).unwrap() < 1e-9);
    }

    #[test]
    fn free_operator_has_no_unstable_mode() {
        let (p, _) = small();
        let free = LinearizedBlocks::from_profile(&p, vec![0.0; p.grid.len()]);
        let err = ground_mode(&p, &free, &EigenOptions { coarse_n: 100, ..Default::default() });
        assert!(matches!(err, Err(Error::NoNegativeEigenvalue { .. })));
    }
}
