//! Time integration of `i u_t + Delta_h u + |u|^{p-1} u = 0` on the radial grid.
//!
//! The default scheme is the fully implicit conservative Crank-Nicolson method:
//! `(M + i dt/2 A) u1 = (M - i dt/2 A) u0 + i dt M G(u0, u1) (u0 + u1)/2` with the
//! difference quotient `G = (F(|u1|^2) - F(|u0|^2)) / (|u1|^2 - |u0|^2)`,
//! `F(s) = 2 s^{q/2} / q`. It conserves the discrete mass and energy up to the
//! fixed-point tolerance. A Strang splitting with an exact or Crank-Nicolson
//! linear substep is also available.

mod trace;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use trace::{energy_drift, EvolutionTrace, Reference, Snapshot, Termination, TerminationRecord, TraceSample};

use crate::diagnostics::fit_modulation;
use crate::discretization::banded::ComplexTridiagonal;
use crate::discretization::norms::l2_norm;
use crate::discretization::RadialField;
use crate::error::{Error, Result};
use crate::ground_state::{energy, kinetic_norm};
use crate::problem::RadialProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    CrankNicolsonFull,
    Strang,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::CrankNicolsonFull => "crank-nicolson-full",
            Scheme::Strang => "strang",
        }
    }
}

/// Linear substep of the Strang splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearStep {
    /// Dense eigendecomposition of the symmetrized Laplacian; `O(n^2)` memory.
    Exact,
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolverConfig {
    pub scheme: Scheme,
    pub linear_step: LinearStep,
    /// Largest time step magnitude.
    pub dt: f64,
    /// Steps below this magnitude end the run as a detected blowup.
    pub dt_floor: f64,
    /// Steps are limited to `nonlinear_step / max|u|^{p-1}`.
    pub nonlinear_step: f64,
    /// Blowup declared when `max|u| > amp_factor max|W|` and
    /// `||grad u|| > grad_factor ||grad W||`.
    pub amp_factor: f64,
    pub grad_factor: f64,
    pub sample_every: f64,
    pub fixed_point_tol: f64,
    pub max_fixed_point_iter: usize,
    /// Fit the modulated distance at each sample.
    pub modulation: bool,
    pub store_snapshots: bool,
}

impl Default for EvolverConfig {
    fn default() -> Self {
        EvolverConfig {
            scheme: Scheme::CrankNicolsonFull,
            linear_step: LinearStep::Exact,
            dt: 0.02,
            dt_floor: 1e-9,
            nonlinear_step: 0.1,
            amp_factor: 10.0,
            grad_factor: 1.5,
            sample_every: 0.5,
            fixed_point_tol: 1e-12,
            max_fixed_point_iter: 60,
            modulation: true,
            store_snapshots: false,
        }
    }
}

impl EvolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.dt) || !positive(self.dt_floor) || self.dt_floor >= self.dt {
            return Err(Error::param(
                "dt",
                format!("need dt > dt_floor > 0, got dt = {}, dt_floor = {}", self.dt, self.dt_floor),
            ));
        }
        if !(self.amp_factor > 1.0 && self.grad_factor > 1.0) {
            return Err(Error::param("amp_factor", "blowup thresholds must exceed 1"));
        }
        if !positive(self.nonlinear_step) || !positive(self.sample_every) || !positive(self.fixed_point_tol) {
            return Err(Error::param(
                "nonlinear_step",
                "nonlinear_step, sample_every and fixed_point_tol must be positive",
            ));
        }
        if self.max_fixed_point_iter == 0 {
            return Err(Error::param("max_fixed_point_iter", "must be positive"));
        }
        Ok(())
    }
}

/// Why a single step was rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepFailure {
    NoConvergence { iterations: usize, change: f64 },
    NonFinite,
}

/// Precomputed operators for stepping on one grid.
pub struct Evolver<'a> {
    problem: &'a RadialProblem,
    config: EvolverConfig,
    p: f64,
    q: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
    volumes: Vec<f64>,
    cached: Option<(f64, ComplexTridiagonal)>,
    spectral: Option<(DMatrix<f64>, DVector<f64>)>,
}

impl<'a> Evolver<'a> {
    pub fn new(problem: &'a RadialProblem, config: EvolverConfig) -> Result<Self> {
        config.validate()?;
        let lap = &problem.laplacian;
        let spectral = if config.scheme == Scheme::Strang && config.linear_step == LinearStep::Exact {
            let (d, o) = lap.symmetrized();
            let n = d.len();
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = d[i];
                if i + 1 < n {
                    m[(i, i + 1)] = o[i];
                    m[(i + 1, i)] = o[i];
                }
            }
            let eig = SymmetricEigen::new(m);
            Some((eig.eigenvectors, eig.eigenvalues))
        } else {
            None
        };
        let dim = problem.grid.dim();
        Ok(Evolver {
            problem,
            config,
            p: dim.critical_exponent(),
            q: dim.energy_exponent(),
            diag: lap.stiffness_diag(),
            off: lap.stiffness_off(),
            volumes: lap.volumes().to_vec(),
            cached: None,
            spectral,
        })
    }

    pub fn config(&self) -> &EvolverConfig {
        &self.config
    }

    fn ensure_factor(&mut self, dt: f64) -> Result<()> {
        let stale = !matches!(&self.cached, Some((h, _)) if *h == dt);
        if stale {
            let tau = Complex64::new(0.0, 0.5 * dt);
            let off: Vec<Complex64> = self.off.iter().map(|a| tau * a).collect();
            let diag: Vec<Complex64> = self
                .diag
                .iter()
                .zip(&self.volumes)
                .map(|(a, m)| Complex64::new(*m, 0.0) + tau * a)
                .collect();
            self.cached = Some((dt, ComplexTridiagonal::factor(&off, &diag, &off)?));
        }
        Ok(())
    }

    fn factor(&self) -> &ComplexTridiagonal {
        &self.cached.as_ref().expect("factor prepared").1
    }

    /// `(M - i dt/2 A) u`.
    fn explicit_half(&self, u: &[Complex64], dt: f64) -> Vec<Complex64> {
        let n = u.len();
        let tau = Complex64::new(0.0, 0.5 * dt);
        (0..n)
            .map(|i| {
                let mut au = u[i] * self.diag[i];
                if i > 0 {
                    au += u[i - 1] * self.off[i - 1];
                }
                if i + 1 < n {
                    au += u[i + 1] * self.off[i];
                }
                u[i] * self.volumes[i] - tau * au
            })
            .collect()
    }

    /// Difference quotient of `F(s) = 2 s^{q/2} / q`.
    fn quotient(&self, s0: f64, s1: f64) -> f64 {
        let a = 0.5 * self.q;
        let ds = s1 - s0;
        let lo = s0.min(s1);
        if ds == 0.0 {
            return s0.powf(a - 1.0);
        }
        if lo <= 0.0 || ds.abs() > 0.5 * lo {
            return (2.0 / self.q) * (s1.powf(a) - s0.powf(a)) / ds;
        }
        (2.0 / self.q) * s0.powf(a) * (a * (ds / s0).ln_1p()).exp_m1() / ds
    }

    /// Advances `u` by `dt` (negative for backward integration).
    pub fn step(&mut self, u: &[Complex64], dt: f64) -> std::result::Result<(Vec<Complex64>, usize), StepFailure> {
        match self.config.scheme {
            Scheme::CrankNicolsonFull => self.step_conservative(u, dt),
            Scheme::Strang => self.step_strang(u, dt).map(|v| (v, 1)),
        }
    }

    fn step_conservative(&mut self, u0: &[Complex64], dt: f64) -> std::result::Result<(Vec<Complex64>, usize), StepFailure> {
        let base = self.explicit_half(u0, dt);
        let s0: Vec<f64> = u0.iter().map(|z| z.norm_sqr()).collect();
        let mut u1 = u0.to_vec();
        let tol = self.config.fixed_point_tol;
        let max_iter = self.config.max_fixed_point_iter;
        self.ensure_factor(dt).map_err(|_| StepFailure::NonFinite)?;
        let factor = self.factor();
        let mut change = f64::INFINITY;
        for it in 1..=max_iter {
            let mut rhs = base.clone();
            for i in 0..rhs.len() {
                let g = self.quotient(s0[i], u1[i].norm_sqr());
                rhs[i] += Complex64::new(0.0, dt * self.volumes[i] * g * 0.5) * (u1[i] + u0[i]);
            }
            factor.solve_in_place(&mut rhs);
            let mut scale = 0.0f64;
            change = 0.0;
            for (a, b) in rhs.iter().zip(&u1) {
                scale = scale.max(a.norm());
                change = change.max((a - b).norm());
            }
            if !(scale.is_finite() && change.is_finite()) {
                return Err(StepFailure::NonFinite);
            }
            u1 = rhs;
            if change <= tol * scale.max(1.0) {
                return Ok((u1, it));
            }
        }
        Err(StepFailure::NoConvergence {
            iterations: max_iter,
            change,
        })
    }

    fn nonlinear_phase(&self, u: &mut [Complex64], dt: f64) {
        let e = 0.5 * (self.p - 1.0);
        for z in u.iter_mut() {
            *z *= Complex64::from_polar(1.0, dt * z.norm_sqr().powf(e));
        }
    }

    fn step_strang(&mut self, u: &[Complex64], dt: f64) -> std::result::Result<Vec<Complex64>, StepFailure> {
        let mut v = u.to_vec();
        self.nonlinear_phase(&mut v, 0.5 * dt);
        if let Some((q, lambda)) = &self.spectral {
            let sq: Vec<f64> = self.volumes.iter().map(|m| m.sqrt()).collect();
            let n = v.len();
            let xr = DVector::from_iterator(n, v.iter().zip(&sq).map(|(z, s)| z.re * s));
            let xi = DVector::from_iterator(n, v.iter().zip(&sq).map(|(z, s)| z.im * s));
            let yr = q.tr_mul(&xr);
            let yi = q.tr_mul(&xi);
            let mut zr = DVector::zeros(n);
            let mut zi = DVector::zeros(n);
            for k in 0..n {
                let ph = Complex64::from_polar(1.0, lambda[k] * dt) * Complex64::new(yr[k], yi[k]);
                zr[k] = ph.re;
                zi[k] = ph.im;
            }
            let wr = q * zr;
            let wi = q * zi;
            for k in 0..n {
                v[k] = Complex64::new(wr[k], wi[k]) / sq[k];
            }
        } else {
            let mut rhs = self.explicit_half(&v, dt);
            self.ensure_factor(dt).map_err(|_| StepFailure::NonFinite)?;
            self.factor().solve_in_place(&mut rhs);
            v = rhs;
        }
        self.nonlinear_phase(&mut v, 0.5 * dt);
        if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(v)
        } else {
            Err(StepFailure::NonFinite)
        }
    }

    fn sample(&self, t: f64, u: &RadialField) -> Result<TraceSample> {
        let grid = &self.problem.grid;
        let (distance, theta, mu) = if self.config.modulation {
            match fit_modulation(u, &self.problem.ground, grid) {
                Ok(fit) => (fit.distance, fit.theta, fit.mu),
                Err(_) => (f64::NAN, f64::NAN, f64::NAN),
            }
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        Ok(TraceSample {
            t,
            energy: energy(u, grid)?,
            kinetic: kinetic_norm(u, grid)?,
            max_amp: u.max_abs(),
            distance,
            theta,
            mu,
        })
    }

    /// Integrates from `t_start` to `t_end` (either direction).
    pub fn evolve(&mut self, u0: &RadialField, t_start: f64, t_end: f64) -> Result<EvolutionTrace> {
        let grid = &self.problem.grid;
        grid.check(u0.spec())?;
        if !u0.is_finite() {
            return Err(Error::NonFinite("initial datum"));
        }
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::param("t_span", "must be finite"));
        }
        let cfg = self.config;
        let w = self.problem.ground.field(grid);
        let reference = Reference {
            kinetic: kinetic_norm(&w, grid)?,
            max_amp: w.max_abs(),
            energy: energy(&w, grid)?,
        };
        let k0 = kinetic_norm(u0, grid)?;
        let m0 = l2_norm(u0, grid)?;
        let group_speed = 2.0 * k0 / m0;
        let reflection_horizon = if group_speed > 0.0 {
            2.0 * grid.r_max() / group_speed
        } else {
            f64::INFINITY
        };
        let dir = if t_end >= t_start { 1.0 } else { -1.0 };
        let mut trace = EvolutionTrace {
            scheme: cfg.scheme.tag().to_string(),
            dt: cfg.dt,
            t_start,
            t_end,
            samples: Vec::new(),
            termination: Termination::Completed { t: t_end },
            reference,
            reflection_horizon,
            steps: 0,
            min_dt: cfg.dt,
            max_iterations: 0,
            snapshots: Vec::new(),
            final_state: u0.clone(),
        };
        let mut t = t_start;
        let mut u = u0.values().to_vec();
        let record = |trace: &mut EvolutionTrace, t: f64, u: &[Complex64], this: &Self| -> Result<()> {
            let f = u0.with_values(u.to_vec());
            trace.samples.push(this.sample(t, &f)?);
            if cfg.store_snapshots {
                trace.snapshots.push(Snapshot { t, field: f });
            }
            Ok(())
        };
        record(&mut trace, t, &u, self)?;
        let mut next_sample = 1usize;
        let power = self.p - 1.0;
        while dir * (t_end - t) > 1e-12 * (1.0 + t.abs()) {
            let target = (t_start + dir * next_sample as f64 * cfg.sample_every).clamp(t_start.min(t_end), t_start.max(t_end));
            let amp = u.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let mut h = cfg.dt.min(cfg.nonlinear_step / amp.max(1e-300).powf(power));
            let remaining = (target - t).abs();
            let mut landing = false;
            if h >= remaining - 0.01 * h {
                h = remaining;
                landing = true;
            }
            let (u_new, iters) = loop {
                if h < cfg.dt_floor {
                    let k = kinetic_norm(&u0.with_values(u.clone()), grid)?;
                    trace.termination = Termination::BlowupDetected {
                        t_star: t,
                        bracket: [t, t + dir * h],
                        max_amp: amp,
                        kinetic: k,
                        cause: "step-size underflow".into(),
                    };
                    trace.final_state = u0.with_values(u);
                    record_final(&mut trace, t, self)?;
                    return Ok(trace);
                }
                match self.step(&u, dir * h) {
                    Ok(ok) => break ok,
                    Err(StepFailure::NonFinite) | Err(StepFailure::NoConvergence { .. }) => {
                        h *= 0.5;
                        landing = false;
                    }
                }
            };
            let t_new = if landing { target } else { t + dir * h };
            trace.steps += 1;
            if !landing {
                trace.min_dt = trace.min_dt.min(h);
            }
            trace.max_iterations = trace.max_iterations.max(iters);
            if u_new.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                trace.termination = Termination::NonFinite { t: t_new };
                trace.final_state = u0.with_values(u);
                return Ok(trace);
            }
            let amp_new = u_new.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if amp_new > cfg.amp_factor * reference.max_amp {
                let k = kinetic_norm(&u0.with_values(u_new.clone()), grid)?;
                if k > cfg.grad_factor * reference.kinetic {
                    record(&mut trace, t_new, &u_new, self)?;
                    trace.termination = Termination::BlowupDetected {
                        t_star: t_new,
                        bracket: [t, t_new],
                        max_amp: amp_new,
                        kinetic: k,
                        cause: "amplitude and gradient thresholds".into(),
                    };
                    trace.final_state = u0.with_values(u_new);
                    return Ok(trace);
                }
            }
            u = u_new;
            t = t_new;
            if landing {
                record(&mut trace, t, &u, self)?;
                next_sample += 1;
            }
        }
        trace.termination = Termination::Completed { t };
        trace.final_state = u0.with_values(u);
        Ok(trace)
    }
}

fn record_final(trace: &mut EvolutionTrace, t: f64, ev: &Evolver) -> Result<()> {
    if trace.samples.last().map(|s| s.t) != Some(t) {
        let s = ev.sample(t, &trace.final_state)?;
        trace.samples.push(s);
    }
    Ok(())
}

/// Convenience wrapper: build an [`Evolver`] and integrate once.
pub fn evolve(
    problem: &RadialProblem,
    u0: &RadialField,
    t_span: [f64; 2],
    config: &EvolverConfig,
) -> Result<EvolutionTrace> {
    Evolver::new(problem, *config)?.evolve(u0, t_span[0], t_span[1])
}
