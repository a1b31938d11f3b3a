use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expansion::ExpansionTable;
use crate::diagnostics::{rate_fit, RateFit};
use crate::discretization::norms::{l2_norm, weighted_sup_norm};
use crate::discretization::{DiscreteLaplacian, GridSpec, RadialField, RadialGrid};
use crate::error::{Error, Result};
use crate::spectrum::{EigenPair, LinearizedBlocks};

/// `F_j`: the coefficient of `e^{-j e0 t}` in `i R(sum_m e^{-m e0 t} Phi_m)`,
/// which only involves `Phi_1 .. Phi_{j-1}`.
pub fn order_forcing(
    j: usize,
    profiles: &[RadialField],
    table: &ExpansionTable,
    base: &[f64],
) -> Result<RadialField> {
    if j < 2 {
        return Err(Error::param("j", format!("forcing starts at order 2, got {j}")));
    }
    if profiles.len() < j - 1 {
        return Err(Error::MissingProfiles {
            j,
            needed: j - 1,
            got: profiles.len(),
        });
    }
    if table.j_max() < j {
        return Err(Error::param(
            "table",
            format!("expansion table has j_max = {} < {j}", table.j_max()),
        ));
    }
    let first = &profiles[0];
    for f in &profiles[..j - 1] {
        if f.len() != base.len() || f.spec() != first.spec() {
            return Err(Error::GridMismatch("profiles and base differ".into()));
        }
    }
    let p = table.p();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(base.len());
    // powers[m][l] = [x^l] V^m, V = sum_{m<j} Phi_m x^m
    let mut powers = vec![vec![zero; j + 1]; j + 1];
    let mut conj_powers = vec![vec![zero; j + 1]; j + 1];
    for (i, &w) in base.iter().enumerate() {
        let mut v = vec![zero; j + 1];
        for m in 1..j {
            v[m] = profiles[m - 1].values()[i];
        }
        powers[0].fill(zero);
        powers[0][0] = Complex64::new(1.0, 0.0);
        for m in 1..=j {
            for l in 0..=j {
                let mut s = zero;
                if l >= m {
                    for a in 1..=l + 1 - m {
                        s += powers[m - 1][l - a] * v[a];
                    }
                }
                powers[m][l] = s;
            }
        }
        for m in 0..=j {
            for l in 0..=j {
                conj_powers[m][l] = powers[m][l].conj();
            }
        }
        let mut f = zero;
        for j1 in 0..=j {
            for j2 in 0..=j - j1 {
                if j1 + j2 < 2 {
                    continue;
                }
                let a = table.get(j1, j2);
                if a == 0.0 {
                    continue;
                }
                let mut c = zero;
                for l in j1..=j - j2 {
                    c += powers[j1][l] * conj_powers[j2][j - l];
                }
                if c != zero {
                    f += c * (a * w.abs().powf(p - (j1 + j2) as f64));
                }
            }
        }
        out.push(f);
    }
    Ok(first.with_values(out))
}

/// Solves `(L - j e0) Phi_j = i F_j` for the order-`j` profile.
pub fn solve_profile(j: usize, forcing: &RadialField, e0: f64, blocks: &LinearizedBlocks) -> Result<RadialField> {
    if forcing.spec() != blocks.spec() {
        return Err(Error::GridMismatch(format!(
            "{:?} vs {:?}",
            forcing.spec(),
            blocks.spec()
        )));
    }
    let n = blocks.len();
    let matrix = blocks.block_matrix(j as f64 * e0);
    let norm = matrix.norm_inf();
    let lu = matrix.factor().map_err(|_| Error::NearSingular {
        j,
        condition: f64::INFINITY,
    })?;
    // i F = -Im F + i Re F
    let mut rhs = Vec::with_capacity(2 * n);
    for z in forcing.values() {
        rhs.push(-z.im);
        rhs.push(z.re);
    }
    let condition = norm * inverse_norm_estimate(&lu, 2 * n);
    if !(condition < 1e13) {
        return Err(Error::NearSingular { j, condition });
    }
    lu.solve_in_place(&mut rhs);
    if rhs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("solve_profile"));
    }
    let vals = rhs
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    Ok(forcing.with_values(vals))
}

fn inverse_norm_estimate(lu: &crate::discretization::banded::BandedLu, n: usize) -> f64 {
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i * 7919) % 13) as f64 / 13.0).collect();
    let mut est = 0.0f64;
    for _ in 0..3 {
        let before = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        lu.solve_in_place(&mut x);
        let after = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        est = est.max(after / before);
        if !(after > 0.0 && after.is_finite()) {
            return f64::INFINITY;
        }
        x.iter_mut().for_each(|v| *v /= after);
    }
    est
}

/// `W_k^a(t) = W + sum_{j=1}^k e^{-j e0 t} Phi_j` with `Phi_1 = a Y+`.
#[derive(Debug, Clone)]
pub struct NearSolution {
    spec: GridSpec,
    e0: f64,
    a: f64,
    p: f64,
    base: Vec<f64>,
    profiles: Vec<RadialField>,
}

impl NearSolution {
    /// Builds profiles up to order `k >= 1`.
    pub fn build(
        blocks: &LinearizedBlocks,
        pair: &EigenPair,
        grid: &RadialGrid,
        table: &ExpansionTable,
        k: usize,
        a: f64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", "order must be at least 1"));
        }
        if !a.is_finite() {
            return Err(Error::param("a", "must be finite"));
        }
        grid.check(blocks.spec())?;
        let mut profiles = vec![pair.y_plus(grid)?.scale(Complex64::new(a, 0.0))];
        for j in 2..=k {
            let f = order_forcing(j, &profiles, table, blocks.base())?;
            profiles.push(solve_profile(j, &f, pair.e0, blocks)?);
        }
        Ok(NearSolution {
            spec: grid.spec(),
            e0: pair.e0,
            a,
            p: blocks.exponent(),
            base: blocks.base().to_vec(),
            profiles,
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn k(&self) -> usize {
        self.profiles.len()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn profiles(&self) -> &[RadialField] {
        &self.profiles
    }

    /// `Phi_j` for `1 <= j <= k`.
    pub fn profile(&self, j: usize) -> Option<&RadialField> {
        j.checked_sub(1).and_then(|i| self.profiles.get(i))
    }

    /// `v_k(t) = sum_j e^{-j e0 t} Phi_j`.
    pub fn perturbation(&self, t: f64) -> RadialField {
        self.combine(|j| (-(j as f64) * self.e0 * t).exp())
    }

    /// `W_k^a(t)`.
    pub fn assemble(&self, t: f64) -> RadialField {
        let mut v = self.perturbation(t);
        for (z, w) in v.values_mut().iter_mut().zip(&self.base) {
            *z += w;
        }
        v
    }

    /// `d/dt W_k^a(t)`.
    pub fn time_derivative(&self, t: f64) -> RadialField {
        self.combine(|j| -(j as f64) * self.e0 * (-(j as f64) * self.e0 * t).exp())
    }

    fn combine<F: Fn(usize) -> f64>(&self, coef: F) -> RadialField {
        let mut out = self.profiles[0].scale(Complex64::new(coef(1), 0.0));
        for (i, f) in self.profiles.iter().enumerate().skip(1) {
            out.axpy(Complex64::new(coef(i + 1), 0.0), f)
                .expect("profiles share a grid");
        }
        out
    }

    /// `eps_k = i d_t W_k + Delta_h W_k + |W_k|^{p-1} W_k`.
    pub fn residual(&self, t: f64, lap: &DiscreteLaplacian) -> Result<RadialField> {
        let u = self.assemble(t);
        let lu = lap.apply(&u)?;
        let dt = self.time_derivative(t);
        let vals = u
            .values()
            .iter()
            .zip(lu.values())
            .zip(dt.values())
            .map(|((z, l), d)| Complex64::i() * d + l + z * z.norm().powf(self.p - 1.0))
            .collect();
        Ok(u.with_values(vals))
    }

    /// `F_{k+1}`, the leading term left out of the truncated expansion.
    pub fn next_forcing(&self, table: &ExpansionTable) -> Result<RadialField> {
        order_forcing(self.k() + 1, &self.profiles, table, &self.base)
    }

    fn amplitude_ratio(&self, t: f64) -> f64 {
        let v = self.perturbation(t);
        v.values()
            .iter()
            .zip(&self.base)
            .fold(0.0, |m, (z, w)| m.max(z.norm() / w.abs()))
    }

    /// Earliest `t` from which `max_r |v_k(t, r)| / W(r) <= ratio` holds for
    /// all later times (located by scanning down from a safe time and
    /// bisecting the last crossing).
    pub fn validity_time(&self, ratio: f64) -> Result<f64> {
        if !(ratio > 0.0) {
            return Err(Error::param("ratio", "must be positive"));
        }
        if self.a == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let step = 0.25 / self.e0;
        let mut hi = 0.0;
        let mut guard = 0;
        while self.amplitude_ratio(hi) > ratio {
            hi += 4.0 * step;
            guard += 1;
            if guard > 10_000 {
                return Err(Error::NotConverged {
                    what: "validity time search",
                    iterations: guard,
                    residual: self.amplitude_ratio(hi),
                });
            }
        }
        let mut lo = hi - step;
        while self.amplitude_ratio(lo) <= ratio {
            hi = lo;
            lo -= step;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.amplitude_ratio(mid) > ratio {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

/// Decay of `eps_k(t)` on a time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub k: usize,
    pub a: f64,
    pub e0: f64,
    pub t_k: f64,
    /// `(k+1) e0`.
    pub expected_rate: f64,
    pub window: [f64; 2],
    /// Decay rate of `||eps_k||_{L^2}`.
    pub rate: f64,
    /// Decay rate of `sup <r>^weight |eps_k|`.
    pub rate_sup: f64,
    pub weight: i32,
    /// Residual of the static base profile; round-off level for the discrete
    /// ground state.
    pub floor: f64,
    /// `(t, ||eps||_2, sup-norm)` samples.
    pub samples: Vec<[f64; 3]>,
}

/// Samples `eps_k` on `[t_start, t_end]` and fits its exponential decay.
pub fn residual_rate(
    near: &NearSolution,
    lap: &DiscreteLaplacian,
    grid: &RadialGrid,
    window: [f64; 2],
    samples: usize,
    weight: i32,
) -> Result<ResidualReport> {
    if samples < 5 || !(window[1] > window[0]) {
        return Err(Error::EmptyWindow(format!(
            "{samples} samples on [{}, {}]",
            window[0], window[1]
        )));
    }
    let base = RadialField::from_real(grid, &near.base)?;
    let static_res = lap.apply(&base)?.zip(&base, |l, w| l + w * w.norm().powf(near.p - 1.0))?;
    let floor = l2_norm(&static_res, grid)?;
    let floor_sup = weighted_sup_norm(&static_res, weight, 0, grid)?;
    let mut rows = Vec::with_capacity(samples);
    for s in 0..samples {
        let t = window[0] + (window[1] - window[0]) * s as f64 / (samples - 1) as f64;
        let eps = near.residual(t, lap)?;
        rows.push([t, l2_norm(&eps, grid)?, weighted_sup_norm(&eps, weight, 0, grid)?]);
    }
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let fit = |col: usize, floor: f64| -> Result<RateFit> {
        let values: Vec<f64> = rows.iter().map(|r| r[col]).collect();
        rate_fit(&times, &values, 100.0 * floor.max(f64::MIN_POSITIVE))
    };
    let l2 = fit(1, floor)?;
    let sup = fit(2, floor_sup)?;
    Ok(ResidualReport {
        k: near.k(),
        a: near.a,
        e0: near.e0,
        t_k: window[0],
        expected_rate: (near.k() + 1) as f64 * near.e0,
        window,
        rate: l2.rate,
        rate_sup: sup.rate,
        weight,
        floor,
        samples: rows,
    })
}

/// Default window: from `t_k` until the predicted residual reaches
/// `1e3` times the static floor.
pub fn default_window(
    near: &NearSolution,
    lap: &DiscreteLaplacian,
    grid: &RadialGrid,
    t_k: f64,
) -> Result<[f64; 2]> {
    let base = RadialField::from_real(grid, &near.base)?;
    let static_res = lap.apply(&base)?.zip(&base, |l, w| l + w * w.norm().powf(near.p - 1.0))?;
    let floor = l2_norm(&static_res, grid)?.max(1e-300);
    let start = l2_norm(&near.residual(t_k, lap)?, grid)?;
    let rate = (near.k() + 1) as f64 * near.e0;
    let span = ((start / (1e3 * floor)).ln() / rate).max(2.0 / near.e0);
    Ok([t_k, t_k + span])
}

/// Manifest of a near-solution bundle directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub d: u32,
    pub r_max: f64,
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub e0: f64,
    pub t_k: f64,
    pub profiles: Vec<String>,
    pub residual_report: ResidualReport,
}

/// Writes `profile_j.csv` for each order and `manifest.json` into `dir`.
pub fn export_bundle(near: &NearSolution, report: &ResidualReport, t_k: f64, dir: &Path) -> Result<BundleManifest> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for (i, f) in near.profiles.iter().enumerate() {
        let name = format!("profile_{}.csv", i + 1);
        f.write_csv(&dir.join(&name))?;
        names.push(name);
    }
    let manifest = BundleManifest {
        d: near.spec.d,
        r_max: near.spec.r_max,
        n: near.spec.n,
        k: near.k(),
        a: near.a,
        e0: near.e0,
        t_k,
        profiles: names,
        residual_report: report.clone(),
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Reads a bundle written by [`export_bundle`].
pub fn import_bundle(dir: &Path) -> Result<(BundleManifest, Vec<RadialField>)> {
    let manifest: BundleManifest = serde_json::from_slice(&std::fs::read(dir.join("manifest.json"))?)?;
    let profiles = manifest
        .profiles
        .iter()
        .map(|name| RadialField::read_csv(&dir.join(name)))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, profiles))
}
