//! Scenario runner: resolves a config, runs one scenario into a
//! content-addressed directory and records outputs and checks.

pub mod config;
pub mod manifest;
pub mod sweep;
pub mod wpm;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{InitialData, ScenarioConfig, ScenarioTag, CONFIG_SCHEMA};
pub use manifest::{config_hash, Check, OutputEntry, RunManifest, MANIFEST_SCHEMA};
pub use sweep::{run_sweep, SweepCell, SweepReport};
pub use wpm::{canonical_wpm, canonical_wpm_with, SeedInfo, WpmOutcome};

use crate::diagnostics::{classify, Regime};
use crate::discretization::norms::l2_norm;
use crate::discretization::RadialField;
use crate::error::{Error, Result, StageExt};
use crate::evolver::{evolve, EvolutionTrace, Termination};
use crate::ground_state::{
    kinetic_norm, potential_integral, sharp_sobolev_constant, sobolev_quotient, GroundState,
};
use crate::problem::RadialProblem;
use crate::series::{default_window, export_bundle, pz_coefficients, residual_rate, NearSolution};
use crate::spectrum::{build_blocks, eigen_residual, export_eigenpair, ground_mode};

/// Runs `config` under `out_root/<scenario>-<hash>`.
///
/// An existing complete run directory is reused as is. Work happens in a
/// sibling `.partial` directory that is renamed once the manifest is written.
pub fn run(config: &ScenarioConfig, out_root: &Path, workers: Option<usize>) -> Result<RunManifest> {
    config.validate()?;
    let hash = config_hash(config)?;
    let name = format!("{}-{hash}", config.scenario.as_str());
    let run_dir = out_root.join(&name);
    if run_dir.join("manifest.json").is_file() {
        return RunManifest::load(&run_dir);
    }
    std::fs::create_dir_all(out_root)?;
    let partial = out_root.join(format!(".{name}.partial-{}", std::process::id()));
    if partial.exists() {
        std::fs::remove_dir_all(&partial)?;
    }
    std::fs::create_dir_all(&partial)?;
    let start = Instant::now();
    let body = || execute(config, &partial);
    let result = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::param("workers", e.to_string()))?
            .install(body),
        None => body(),
    };
    let (outputs, checks) = match result {
        Ok(v) => v,
        Err(e) => {
            let _ = std::fs::remove_dir_all(&partial);
            return Err(e);
        }
    };
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA.into(),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        scenario: config.scenario.as_str().into(),
        config_hash: hash,
        run_dir: run_dir.clone(),
        config: config.clone(),
        outputs,
        checks,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    std::fs::write(partial.join("config.json"), config.to_json()?)?;
    std::fs::write(partial.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    if run_dir.exists() {
        // another process finished the same config first
        let _ = std::fs::remove_dir_all(&partial);
        return RunManifest::load(&run_dir);
    }
    std::fs::rename(&partial, &run_dir)?;
    Ok(manifest)
}

type Outcome = (Vec<OutputEntry>, Vec<Check>);

fn execute(config: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    match config.scenario {
        ScenarioTag::GroundState => ground_state(config, dir),
        ScenarioTag::Spectrum => spectrum(config, dir),
        ScenarioTag::BuildSeries => build_series(config, dir),
        ScenarioTag::EvolveNearSolution => evolve_near_solution(config, dir),
        ScenarioTag::ClassifyCustom => classify_custom(config, dir),
        ScenarioTag::Sweep => sweep_scenario(config, dir),
    }
}

fn entry(file: &str, module: &str, description: &str) -> OutputEntry {
    OutputEntry {
        file: file.into(),
        module: module.into(),
        description: description.into(),
    }
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

fn problem(config: &ScenarioConfig) -> Result<RadialProblem> {
    let g = config.grid;
    RadialProblem::new(g.d, g.r_max, g.n, g.profile)
}

/// Static checks on the closed-form ground state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundStateSummary {
    pub d: u32,
    pub r_max: f64,
    pub n: usize,
    /// `||grad W||^2`.
    pub kinetic: f64,
    /// `||W||_q^q`.
    pub potential: f64,
    pub energy: f64,
    /// `|E(W) - ||grad W||^2 / d| / E(W)`.
    pub energy_identity_defect: f64,
    /// Same identity evaluated on the discrete profile `U`.
    pub discrete_energy_identity_defect: f64,
    pub sobolev_quotient: f64,
    pub sharp_constant: f64,
    /// `||Delta_h W + W^p|| / ||W^p||` over the interior equation rows.
    pub static_residual: f64,
    /// `max |U - W|` between the discrete and closed-form profiles.
    pub discrete_deviation: f64,
}

fn energy_identity(u: &RadialField, grid: &crate::RadialGrid) -> Result<(f64, f64, f64)> {
    let k = kinetic_norm(u, grid)?.powi(2);
    let p = potential_integral(u, grid)?;
    let e = 0.5 * k - p / grid.dim().energy_exponent();
    Ok((k, p, e))
}

pub fn ground_state_summary(problem: &RadialProblem) -> Result<GroundStateSummary> {
    let grid = &problem.grid;
    let d = grid.d() as f64;
    let exact = GroundState::closed_form(grid);
    let we = exact.field(grid);
    let (k, p, e) = energy_identity(&we, grid)?;
    let discrete = GroundState::discrete(grid);
    let (kd, _, ed) = energy_identity(&discrete.field(grid), grid)?;
    let pow = grid.dim().critical_exponent();
    let source = we.map(|z| z * z.norm().powf(pow - 1.0));
    let mut res = problem.laplacian.apply(&we)?.add(&source)?.into_values();
    // the outer row carries the truncation closure, not the equation
    *res.last_mut().unwrap() = 0.0.into();
    let res = RadialField::from_values(grid, res)?;
    let deviation = discrete
        .values()
        .iter()
        .zip(exact.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(GroundStateSummary {
        d: grid.d(),
        r_max: grid.r_max(),
        n: grid.n(),
        kinetic: k,
        potential: p,
        energy: e,
        energy_identity_defect: (e - k / d).abs() / e,
        discrete_energy_identity_defect: (ed - kd / d).abs() / ed,
        sobolev_quotient: sobolev_quotient(&we, grid)?,
        sharp_constant: sharp_sobolev_constant(grid.dim()),
        static_residual: l2_norm(&res, grid)? / l2_norm(&source, grid)?,
        discrete_deviation: deviation,
    })
}

/// Result of perturbing `W` along one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalityProbe {
    pub center: f64,
    pub width: f64,
    /// `Q(W + eps phi) - Q(W)`.
    pub change: f64,
}

/// Sobolev quotient changes along `count` Gaussian bumps of varied centre
/// and width, each normalised to unit sup norm.
pub fn extremality_probes(grid: &crate::RadialGrid, eps: f64, count: usize) -> Result<Vec<ExtremalityProbe>> {
    let w = GroundState::closed_form(grid).field(grid);
    let q0 = sobolev_quotient(&w, grid)?;
    let side = (count as f64).sqrt().ceil() as usize;
    let r_max = grid.r_max();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let center = 0.4 * r_max * (i / side) as f64 / side as f64;
        let width = 0.25 * 1.5f64.powi((i % side) as i32);
        let bump = RadialField::from_fn(grid, |r| (-((r - center) / width).powi(2)).exp().into());
        let mut u = w.clone();
        u.axpy(eps.into(), &bump)?;
        out.push(ExtremalityProbe {
            center,
            width,
            change: sobolev_quotient(&u, grid)? - q0,
        });
    }
    Ok(out)
}

fn ground_state(config: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let problem = problem(config)?;
    let s = ground_state_summary(&problem)?;
    let probes = extremality_probes(&problem.grid, 1e-3, 100)?;
    let worst = probes.iter().map(|p| p.change).fold(f64::NEG_INFINITY, f64::max);
    problem.ground.field(&problem.grid).write_csv(&dir.join("ground_state.csv"))?;
    write_json(dir.join("ground_state.json"), &s)?;
    write_json(dir.join("extremality.json"), &probes)?;
    let m = "ground_state";
    let checks = vec![
        Check::at_most("static residual of W", "discretization", s.static_residual, 1e-5),
        Check::at_most("|E(W) - K/d| / E(W)", m, s.energy_identity_defect, 1e-6),
        Check::at_most(
            "|Sobolev quotient / sharp constant - 1|",
            m,
            (s.sobolev_quotient / s.sharp_constant - 1.0).abs(),
            1e-6,
        ),
        Check::at_most("max quotient gain over 100 bump directions", m, worst, 1e-10),
    ];
    Ok((
        vec![
            entry("ground_state.csv", m, "sampled base profile"),
            entry("ground_state.json", m, "functionals and static residuals"),
            entry("extremality.json", m, "quotient change along bump perturbations"),
        ],
        checks,
    ))
}

fn spectrum(config: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let problem = problem(config)?;
    let blocks = build_blocks(&problem);
    let pair = ground_mode(&problem, &blocks, &config.eigen).stage("spectrum")?;
    let residual = eigen_residual(&blocks, &pair)?;
    export_eigenpair(
        &pair,
        residual,
        &problem.grid,
        &dir.join("eigenfunction.csv"),
        &dir.join("eigenfunction.json"),
    )?;
    let m = "linearized_spectrum";
    Ok((
        vec![
            entry("eigenfunction.csv", m, "eigenfunction Y+ = y1 + i y2"),
            entry("eigenfunction.json", m, "eigenvalue sidecar"),
        ],
        vec![
            Check::at_least("e0", m, pair.e0, f64::MIN_POSITIVE),
            Check::at_most("eigen residual", m, residual, 1e-8),
        ],
    ))
}

fn build_series(config: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let problem = problem(config)?;
    let grid = &problem.grid;
    let blocks = build_blocks(&problem);
    let pair = ground_mode(&problem, &blocks, &config.eigen).stage("spectrum")?;
    let table = pz_coefficients(grid.dim().critical_exponent(), config.series.j_max)?;
    let s = &config.series;
    let near = NearSolution::build(&blocks, &pair, grid, &table, s.k, s.a).stage("series")?;
    let t_k = near.validity_time(s.validity_ratio)?;
    let window = default_window(&near, &problem.laplacian, grid, t_k)?;
    let report = residual_rate(&near, &problem.laplacian, grid, window, s.residual_samples, s.residual_weight)?;
    export_bundle(&near, &report, t_k, &dir.join("bundle"))?;
    let m = "series_builder";
    Ok((
        vec![entry("bundle/manifest.json", m, "near-solution bundle")],
        vec![Check::at_most(
            "|residual rate / ((k+1) e0) - 1|",
            m,
            (report.rate / report.expected_rate - 1.0).abs(),
            s.rate_tolerance,
        )],
    ))
}

fn export_trace(trace: &EvolutionTrace, dir: &Path, stem: &str, out: &mut Vec<OutputEntry>) -> Result<()> {
    let csv = format!("{stem}.csv");
    let json = format!("{stem}.json");
    trace.export(&dir.join(&csv), &dir.join(&json))?;
    out.push(entry(&csv, "evolver", "sampled trace"));
    out.push(entry(&json, "evolver", "termination record"));
    Ok(())
}

fn evolve_near_solution(config: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let o = canonical_wpm_with(config)?;
    let mut out = Vec::new();
    export_trace(&o.forward, dir, "forward_trace", &mut out)?;
    export_trace(&o.backward, dir, "backward_trace", &mut out)?;
    if let Some(fine) = &o.refined_backward {
        export_trace(fine, dir, "backward_trace_half_dt", &mut out)?;
    }
    write_json(dir.join("forward_report.json"), &o.forward_report)?;
    write_json(dir.join("backward_report.json"), &o.backward_report)?;
    write_json(dir.join("seed.json"), &o.seed)?;
    out.push(entry("forward_report.json", "diagnostics", "forward classification"));
    out.push(entry("backward_report.json", "diagnostics", "backward classification"));
    out.push(entry("seed.json", "experiments", "seed time and energy offset"));
    Ok((out, o.checks))
}

/// Builds the initial datum described by `initial` on `problem`.
pub fn initial_data(
    config: &ScenarioConfig,
    problem: &RadialProblem,
    initial: &InitialData,
) -> Result<(RadialField, f64)> {
    match initial {
        InitialData::ScaledGroundState { factor } => {
            Ok((problem.ground.field(&problem.grid).scale((*factor).into()), 0.0))
        }
        InitialData::NearSolution { a, k } => {
            let blocks = build_blocks(problem);
            let pair = ground_mode(problem, &blocks, &config.eigen).stage("spectrum")?;
            let (near, seed) = wpm::seed(problem, &pair, config, *k, *a)?;
            Ok((near.assemble(seed.t_seed), seed.t_seed))
        }
        InitialData::Field { path } => {
            let u = RadialField::read_csv(path)?;
            problem.grid.check(u.spec())?;
            Ok((u, 0.0))
        }
    }
}

fn classify_custom(config: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let problem = problem(config)?;
    let (u0, t0) = initial_data(config, &problem, &config.classify.initial)?;
    let span = config.classify.t_span;
    let trace = evolve(&problem, &u0, [t0 + span[0], t0 + span[1]], &config.evolver)?;
    let report = classify(&trace, &config.thresholds)?;
    let mut out = Vec::new();
    export_trace(&trace, dir, "trace", &mut out)?;
    write_json(dir.join("report.json"), &report)?;
    out.push(entry("report.json", "diagnostics", "classification report"));
    let checks = vec![
        Check::holds(
            "trace stayed finite",
            "evolver",
            !matches!(trace.termination, Termination::NonFinite { .. }),
        ),
        Check::holds(
            "regime determined",
            "diagnostics",
            report.regime != Regime::Undetermined,
        ),
    ];
    Ok((out, checks))
}

fn sweep_scenario(config: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let report = run_sweep(config)?;
    report.write_csv(&dir.join("sweep.csv"))?;
    write_json(dir.join("sweep.json"), &report)?;
    let checks = report.checks(config);
    Ok((
        vec![
            entry("sweep.csv", "experiments", "one row per (d, n, k, a) cell"),
            entry("sweep.json", "experiments", "cells and refinement orders"),
        ],
        checks,
    ))
}
