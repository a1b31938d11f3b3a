use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, ScenarioTag};
use super::manifest::Check;
use crate::diagnostics::{classify, ClassificationReport, KineticSide, Regime};
use crate::error::{Result, StageExt};
use crate::evolver::{evolve, EvolutionTrace, EvolverConfig, Termination};
use crate::ground_state::{energy, kinetic_norm};
use crate::series::{pz_coefficients, NearSolution};
use crate::spectrum::{build_blocks, ground_mode, EigenPair};
use crate::problem::RadialProblem;

/// Where a threshold run was started.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub k: usize,
    pub a: f64,
    pub t_seed: f64,
    pub seed_ratio: f64,
    /// `(E(seed) - E(W)) / E(W)`.
    pub energy_defect: f64,
    /// `||grad seed|| / ||grad W|| - 1`.
    pub kinetic_offset: f64,
}

/// Forward and backward runs from a near-solution seed.
#[derive(Debug, Clone)]
pub struct WpmOutcome {
    pub d: u32,
    pub sign: i32,
    pub e0: f64,
    pub seed: SeedInfo,
    pub forward: EvolutionTrace,
    pub forward_report: ClassificationReport,
    pub backward: EvolutionTrace,
    pub backward_report: ClassificationReport,
    /// Backward run repeated at half the step (blowing-up branch only).
    pub refined_backward: Option<EvolutionTrace>,
    pub checks: Vec<Check>,
}

/// Near solution seeded at `max|v_k|/W = seed_ratio`.
pub fn seed(
    problem: &RadialProblem,
    pair: &EigenPair,
    config: &ScenarioConfig,
    k: usize,
    a: f64,
) -> Result<(NearSolution, SeedInfo)> {
    let blocks = build_blocks(problem);
    let table = pz_coefficients(problem.grid.dim().critical_exponent(), config.series.j_max)?;
    let near = NearSolution::build(&blocks, pair, &problem.grid, &table, k, a).stage("series")?;
    let t_seed = near.validity_time(config.series.seed_ratio)?;
    let u0 = near.assemble(t_seed);
    let grid = &problem.grid;
    let w = problem.ground.field(grid);
    let e_w = energy(&w, grid)?;
    let info = SeedInfo {
        k,
        a,
        t_seed,
        seed_ratio: config.series.seed_ratio,
        energy_defect: (energy(&u0, grid)? - e_w) / e_w,
        kinetic_offset: kinetic_norm(&u0, grid)? / kinetic_norm(&w, grid)? - 1.0,
    };
    Ok((near, info))
}

/// Threshold runs for dimension `d` and `sign(a)`, with default settings.
pub fn canonical_wpm(d: u32, sign: i32) -> Result<WpmOutcome> {
    let mut config = ScenarioConfig::new(ScenarioTag::EvolveNearSolution);
    config.grid.d = d;
    config.wpm.sign = sign;
    canonical_wpm_with(&config)
}

/// Seeds `W_k^{sign}` and integrates forward and backward in time.
pub fn canonical_wpm_with(config: &ScenarioConfig) -> Result<WpmOutcome> {
    config.validate()?;
    let g = config.grid;
    let sign = config.wpm.sign;
    let problem = RadialProblem::new(g.d, g.r_max, g.n, g.profile)?;
    let blocks = build_blocks(&problem);
    let pair = ground_mode(&problem, &blocks, &config.eigen).stage("spectrum")?;
    let e0 = pair.e0;
    let (near, seed) = seed(&problem, &pair, config, config.series.k, sign as f64)?;
    let u0 = near.assemble(seed.t_seed);
    let t_s = seed.t_seed;
    let fwd_span = [t_s, t_s + config.wpm.forward_span / e0];
    let bwd_span = [t_s, t_s - config.wpm.backward_span / e0];
    let ev = config.evolver;
    let refine = sign > 0 && config.wpm.refine_blowup;
    let half = EvolverConfig { dt: 0.5 * ev.dt, ..ev };
    let (forward, (backward, refined)) = rayon::join(
        || evolve(&problem, &u0, fwd_span, &ev),
        || {
            rayon::join(
                || evolve(&problem, &u0, bwd_span, &ev),
                || refine.then(|| evolve(&problem, &u0, bwd_span, &half)),
            )
        },
    );
    let forward = forward.stage("forward run")?;
    let backward = backward.stage("backward run")?;
    let refined_backward = refined.transpose().stage("refined backward run")?;
    let forward_report = classify(&forward, &config.thresholds)?;
    let backward_report = classify(&backward, &config.thresholds)?;

    let module = "experiments";
    let mut checks = vec![Check::holds(
        "forward regime is converges-to-W",
        module,
        forward_report.regime == Regime::ConvergesToW,
    )];
    let rate_error = forward_report.rate.map_or(f64::INFINITY, |r| (r / e0 - 1.0).abs());
    checks.push(Check::at_most(
        "forward |rate/e0 - 1|",
        "diagnostics",
        rate_error,
        config.wpm.rate_tolerance,
    ));
    let side = if sign < 0 { KineticSide::Below } else { KineticSide::Above };
    checks.push(Check::holds(
        format!("forward kinetic side is {side:?} at every sample"),
        "diagnostics",
        forward_report.kinetic_side == side && forward_report.kinetic_violations.is_empty(),
    ));
    let expected = if sign < 0 { Regime::ScatteringProxy } else { Regime::Blowup };
    checks.push(Check::holds(
        format!("backward regime is {expected:?}"),
        module,
        backward_report.regime == expected,
    ));
    if let Some(fine) = &refined_backward {
        let t_star = |tr: &EvolutionTrace| match tr.termination {
            Termination::BlowupDetected { t_star, .. } => Some(t_star),
            _ => None,
        };
        let change = match (t_star(&backward), t_star(fine)) {
            (Some(a), Some(b)) => (a - b).abs() / (a - t_s).abs(),
            _ => f64::INFINITY,
        };
        checks.push(Check::at_most(
            "blowup time change under dt/2 (relative to elapsed time)",
            "evolver",
            change,
            config.wpm.blowup_time_tolerance,
        ));
    }
    Ok(WpmOutcome {
        d: g.d,
        sign,
        e0,
        seed,
        forward,
        forward_report,
        backward,
        backward_report,
        refined_backward,
        checks,
    })
}
