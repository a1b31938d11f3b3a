//! Modulation fits, decay rates and trajectory classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::norms::{self, Parity};
use crate::discretization::{RadialField, RadialGrid};
use crate::error::{Error, Result};
use crate::evolver::{EvolutionTrace, Termination};
use crate::ground_state::{GroundState, SymmetryParams};

/// Best fit of a field by `e^{i theta} W_mu` in the homogeneous `H^1` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationFit {
    pub theta: f64,
    pub mu: f64,
    pub distance: f64,
    pub evaluations: usize,
}

struct Target<'a> {
    grid: &'a RadialGrid,
    ground: &'a GroundState,
    du: Vec<Complex64>,
    edge: Complex64,
    norm_sq: f64,
}

impl Target<'_> {
    /// `(distance, theta)` at scale `mu`; `None` if the scale leaves the grid.
    fn eval(&self, mu: f64) -> Option<(f64, f64)> {
        if !(mu > 0.0) || self.grid.r_max() / mu < 2.0 * self.grid.h() {
            return None;
        }
        let w: Vec<Complex64> = self
            .ground
            .modulated_real(mu, self.grid)
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect();
        let dw = norms::radial_derivative(&w, self.grid.h(), Parity::Even);
        let n = self.grid.n();
        let w_sq = norms::h1_inner_from_derivatives(&dw, &dw, w[n], w[n], self.grid).re;
        let ip = norms::h1_inner_from_derivatives(&dw, &self.du, w[n], self.edge, self.grid);
        let d_sq = (self.norm_sq + w_sq - 2.0 * ip.norm()).max(0.0);
        Some((d_sq.sqrt(), ip.arg()))
    }
}

/// Minimizes `||u - e^{i theta} W_mu||_{H^1}` over `(theta, mu)`.
///
/// For fixed `mu` the optimal phase is the argument of `<W_mu, u>`; the scale
/// is located by a log-spaced scan around the amplitude-matching guess
/// `|u(0)| = mu^{-(d-2)/2} W(0)` followed by golden-section refinement.
pub fn fit_modulation(u: &RadialField, ground: &GroundState, grid: &RadialGrid) -> Result<ModulationFit> {
    grid.check(u.spec())?;
    if !u.is_finite() {
        return Err(Error::NonFinite("fit_modulation"));
    }
    let du = norms::radial_derivative(u.values(), grid.h(), Parity::Even);
    let edge = u.values()[grid.n()];
    let norm_sq = norms::h1_inner_from_derivatives(&du, &du, edge, edge, grid).re;
    let target = Target {
        grid,
        ground,
        du,
        edge,
        norm_sq,
    };
    let mut evaluations = 0;
    let mut eval = |mu: f64| {
        evaluations += 1;
        target.eval(mu)
    };

    let w0 = ground.values()[0];
    let amp = u.values()[0].norm();
    let power = grid.dim().scaling_power();
    let guess = if amp > 0.0 {
        (amp / w0).powf(-1.0 / power).clamp(1e-3, 1e3)
    } else {
        1.0
    };
    let mut samples: Vec<(f64, f64, f64)> = Vec::new();
    let push = |mu: f64, samples: &mut Vec<(f64, f64, f64)>, eval: &mut dyn FnMut(f64) -> Option<(f64, f64)>| {
        if let Some((d, th)) = eval(mu) {
            samples.push((mu.ln(), d, th));
        }
    };
    for s in -10..=10 {
        push(guess * 4f64.powf(s as f64 / 10.0), &mut samples, &mut eval);
    }
    push(1.0, &mut samples, &mut eval);
    let mut widen = 0;
    let best = loop {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        samples.dedup_by(|a, b| a.0 == b.0);
        if samples.len() < 3 {
            return Err(Error::BracketFailure {
                profile: samples.iter().map(|s| (s.0.exp(), s.1)).collect(),
            });
        }
        let i = (0..samples.len())
            .min_by(|&a, &b| samples[a].1.total_cmp(&samples[b].1))
            .unwrap();
        if i > 0 && i + 1 < samples.len() {
            break i;
        }
        widen += 1;
        if widen > 4 {
            return Err(Error::BracketFailure {
                profile: samples.iter().map(|s| (s.0.exp(), s.1)).collect(),
            });
        }
        let edge_mu = samples[i].0;
        let dir = if i == 0 { -1.0 } else { 1.0 };
        let before = samples.len();
        for s in 1..=10 {
            push((edge_mu + dir * s as f64 * 0.2 * 4f64.ln() / 2.0).exp(), &mut samples, &mut eval);
        }
        if samples.len() == before {
            // scale range exhausted at the grid edge: accept the edge
            break i;
        }
    };

    let (mut lo, mut hi) = if best > 0 && best + 1 < samples.len() {
        (samples[best - 1].0, samples[best + 1].0)
    } else {
        let x = samples[best].0;
        (x, x)
    };
    let mut best_point = samples[best];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |x: f64, eval: &mut dyn FnMut(f64) -> Option<(f64, f64)>| eval(x.exp()).unwrap_or((f64::INFINITY, 0.0));
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1, &mut eval);
    let mut f2 = f(x2, &mut eval);
    while hi - lo > 1e-10 {
        if f1.0 <= f2.0 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1, &mut eval);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2, &mut eval);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v.0 < best_point.1 {
            best_point = (x, v.0, v.1);
        }
    }
    // the expanded form above loses digits near zero distance; recompute directly
    let s = SymmetryParams {
        theta: best_point.2,
        mu: best_point.0.exp(),
    };
    let distance = norms::h1_distance(u, &ground.modulated(s, grid)?, grid)?;
    Ok(ModulationFit {
        theta: s.theta,
        mu: s.mu,
        distance,
        evaluations,
    })
}

/// Least-squares fit of `log value = c - rate * t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
    /// Root-mean-square misfit of the log-linear model.
    pub misfit: f64,
    pub window: [f64; 2],
    pub samples: usize,
    /// Whether the fitted decay is significant over the window.
    pub decaying: bool,
}

/// Fits an exponential decay rate to `values(times)`, using samples from the
/// first one up to the last one that is at least `10 * floor`.
pub fn rate_fit(times: &[f64], values: &[f64], floor: f64) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::param("values", "times and values differ in length"));
    }
    if times.iter().chain(values).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("rate_fit"));
    }
    let last = values
        .iter()
        .rposition(|&v| v >= 10.0 * floor)
        .ok_or_else(|| Error::EmptyWindow(format!("no sample above 10 x floor = {:.3e}", 10.0 * floor)))?;
    let t = &times[..=last];
    let v = &values[..=last];
    if t.len() < 3 || v.iter().any(|&x| x <= 0.0) {
        return Err(Error::EmptyWindow(format!(
            "{} usable samples (need 3 positive)",
            t.len()
        )));
    }
    let m = t.len() as f64;
    let y: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let tm = t.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let stt: f64 = t.iter().map(|x| (x - tm) * (x - tm)).sum();
    if stt == 0.0 {
        return Err(Error::EmptyWindow("all samples at one time".into()));
    }
    let sty: f64 = t.iter().zip(&y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let misfit = (t
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    let span = t[t.len() - 1] - t[0];
    let rate = -slope;
    Ok(RateFit {
        rate,
        intercept,
        misfit,
        window: [t[0], t[t.len() - 1]],
        samples: t.len(),
        decaying: rate * span.abs() > 0.1,
    })
}

/// Position of `||grad u||` relative to `||grad W||`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KineticSide {
    Below,
    At,
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dichotomy {
    pub side: KineticSide,
    /// Sample times lying strictly on the other side.
    pub violations: Vec<f64>,
}

/// Side of the kinetic threshold along a trace, with deadband `deadband`
/// relative to `||grad W||`.
pub fn kinetic_dichotomy(trace: &EvolutionTrace, deadband: f64) -> Dichotomy {
    let reference = trace.reference.kinetic;
    let side_of = |k: f64| {
        let r = k / reference - 1.0;
        if r > deadband {
            KineticSide::Above
        } else if r < -deadband {
            KineticSide::Below
        } else {
            KineticSide::At
        }
    };
    let sides: Vec<(f64, KineticSide)> = trace.samples.iter().map(|s| (s.t, side_of(s.kinetic))).collect();
    let below = sides.iter().filter(|s| s.1 == KineticSide::Below).count();
    let above = sides.iter().filter(|s| s.1 == KineticSide::Above).count();
    let side = if below == 0 && above == 0 {
        KineticSide::At
    } else if below >= above {
        KineticSide::Below
    } else {
        KineticSide::Above
    };
    let other = match side {
        KineticSide::Below => Some(KineticSide::Above),
        KineticSide::Above => Some(KineticSide::Below),
        KineticSide::At => None,
    };
    let violations = sides
        .iter()
        .filter(|s| Some(s.1) == other)
        .map(|s| s.0)
        .collect();
    Dichotomy { side, violations }
}

/// Long-time regime of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    ConvergesToW,
    ScatteringProxy,
    Blowup,
    Undetermined,
}

/// Thresholds used by [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Modulated distance counted as "at W", relative to `||grad W||`.
    pub converge_distance: f64,
    /// Minimal decay factor of the modulated distance before departure.
    pub min_decay_factor: f64,
    /// Potential-to-kinetic energy ratio below which dispersion is declared.
    pub scattering_ratio: f64,
    /// Relative deadband of the kinetic dichotomy.
    pub kinetic_deadband: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            converge_distance: 1e-3,
            min_decay_factor: 10.0,
            scattering_ratio: 0.05,
            kinetic_deadband: 1e-6,
        }
    }
}

/// Time windows that entered a classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Windows {
    pub trace: [f64; 2],
    /// Samples used by the decay-rate fit.
    pub fit: Option<[f64; 2]>,
    /// Times before which boundary reflections cannot reach the core.
    pub reflection: [f64; 2],
    pub scattering_crossing: Option<f64>,
    pub blowup_bracket: Option<[f64; 2]>,
}

/// Classification of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub regime: Regime,
    pub kinetic_side: KineticSide,
    pub kinetic_violations: Vec<f64>,
    /// Decay rate of the modulated distance in elapsed time, if fitted.
    pub rate: Option<f64>,
    pub theta: f64,
    pub mu: f64,
    pub min_distance: f64,
    pub windows: Windows,
    pub thresholds: Thresholds,
}

/// Potential-to-kinetic energy ratio `(1/q)||u||_q^q / (1/2 ||grad u||^2)`.
pub fn potential_ratio(energy: f64, kinetic: f64) -> f64 {
    let half = 0.5 * kinetic * kinetic;
    (half - energy) / half
}

/// Assigns a regime to a trace.
///
/// Blowup comes from the termination record. Convergence requires the
/// modulated distance to fall by `min_decay_factor` to below
/// `converge_distance * ||grad W||` with a positive fitted rate on the
/// pre-departure window (start to the distance minimum), or to stay below
/// that level throughout. Dispersion is declared when the potential energy
/// ratio drops below `scattering_ratio` inside the reflection horizon.
pub fn classify(trace: &EvolutionTrace, thresholds: &Thresholds) -> Result<ClassificationReport> {
    let samples = &trace.samples;
    if samples.is_empty() {
        return Err(Error::EmptyWindow("trace has no samples".into()));
    }
    let t0 = samples[0].t;
    let last = samples[samples.len() - 1];
    let dich = kinetic_dichotomy(trace, thresholds.kinetic_deadband);
    let dir = trace.direction();
    let reflection = [t0, t0 + dir * trace.reflection_horizon];
    let mut report = ClassificationReport {
        regime: Regime::Undetermined,
        kinetic_side: dich.side,
        kinetic_violations: dich.violations,
        rate: None,
        theta: last.theta,
        mu: last.mu,
        min_distance: samples.iter().map(|s| s.distance).fold(f64::INFINITY, f64::min),
        windows: Windows {
            trace: [t0, last.t],
            fit: None,
            reflection,
            scattering_crossing: None,
            blowup_bracket: None,
        },
        thresholds: *thresholds,
    };
    match trace.termination {
        Termination::BlowupDetected { bracket, .. } => {
            report.regime = Regime::Blowup;
            report.windows.blowup_bracket = Some(bracket);
            return Ok(report);
        }
        Termination::NonFinite { .. } => return Ok(report),
        Termination::Completed { .. } => {}
    }
    let tol = thresholds.converge_distance * trace.reference.kinetic;
    let dist: Vec<f64> = samples.iter().map(|s| s.distance).collect();
    if dist.iter().all(|&d| d < tol) {
        report.regime = Regime::ConvergesToW;
        return Ok(report);
    }
    let i_min = (0..dist.len()).min_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap();
    if i_min >= 2 && dist[i_min] < tol && dist[0] >= thresholds.min_decay_factor * dist[i_min] {
        let elapsed: Vec<f64> = samples[..=i_min].iter().map(|s| (s.t - t0).abs()).collect();
        if let Ok(fit) = rate_fit(&elapsed, &dist[..=i_min], dist[i_min]) {
            if fit.rate > 0.0 && fit.decaying {
                report.regime = Regime::ConvergesToW;
                report.rate = Some(fit.rate);
                report.windows.fit = Some([t0 + dir * fit.window[0], t0 + dir * fit.window[1]]);
                report.theta = samples[i_min].theta;
                report.mu = samples[i_min].mu;
                return Ok(report);
            }
        }
    }
    for s in samples {
        if (s.t - t0).abs() > trace.reflection_horizon {
            break;
        }
        if potential_ratio(s.energy, s.kinetic) < thresholds.scattering_ratio {
            report.regime = Regime::ScatteringProxy;
            report.windows.scattering_crossing = Some(s.t);
            return Ok(report);
        }
    }
    Ok(report)
}
