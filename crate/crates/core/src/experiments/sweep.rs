use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::manifest::Check;
use crate::error::{Result, StageExt};
use crate::problem::RadialProblem;
use crate::series::{default_window, pz_coefficients, residual_rate, NearSolution};
use crate::spectrum::{build_blocks, eigen_residual, ground_mode, EigenPair, LinearizedBlocks};

/// One `(d, n, k, a)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub d: u32,
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub e0: f64,
    pub eigen_residual: f64,
    pub t_k: f64,
    pub residual_rate: f64,
    /// `residual_rate / ((k + 1) e0)`.
    pub rate_ratio: f64,
    /// Relative sup-distance between `v_k^a(t)` and `v_k^{sign a}(t - ln|a| / e0)`.
    pub translation_defect: f64,
    pub error: Option<String>,
}

/// Observed refinement order of `e0` in `n` for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementOrder {
    pub d: u32,
    pub n: [usize; 3],
    pub e0: [f64; 3],
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub orders: Vec<RefinementOrder>,
}

struct Level {
    d: u32,
    n: usize,
    problem: RadialProblem,
    blocks: LinearizedBlocks,
    pair: EigenPair,
    residual: f64,
}

fn level(config: &ScenarioConfig, d: u32, n: usize) -> Result<Level> {
    let problem = RadialProblem::new(d, config.grid.r_max, n, config.grid.profile)?;
    let blocks = build_blocks(&problem);
    let pair = ground_mode(&problem, &blocks, &config.eigen).stage("spectrum")?;
    let residual = eigen_residual(&blocks, &pair)?;
    Ok(Level {
        d,
        n,
        problem,
        blocks,
        pair,
        residual,
    })
}

fn cell(config: &ScenarioConfig, lv: &Level, k: usize, a: f64) -> Result<SweepCell> {
    let grid = &lv.problem.grid;
    let table = pz_coefficients(grid.dim().critical_exponent(), config.series.j_max)?;
    let near = NearSolution::build(&lv.blocks, &lv.pair, grid, &table, k, a)?;
    let unit = NearSolution::build(&lv.blocks, &lv.pair, grid, &table, k, a.signum())?;
    let t_k = near.validity_time(config.series.validity_ratio)?;
    let window = default_window(&near, &lv.problem.laplacian, grid, t_k)?;
    let report = residual_rate(
        &near,
        &lv.problem.laplacian,
        grid,
        window,
        config.series.residual_samples,
        config.series.residual_weight,
    )?;
    let shift = -a.abs().ln() / lv.pair.e0;
    let mut defect = 0.0f64;
    for s in 0..5 {
        let t = t_k + s as f64 / lv.pair.e0;
        let v = near.perturbation(t);
        let w = unit.perturbation(t + shift);
        defect = defect.max(v.sub(&w)?.max_abs() / v.max_abs());
    }
    Ok(SweepCell {
        d: lv.d,
        n: lv.n,
        k,
        a,
        e0: lv.pair.e0,
        eigen_residual: lv.residual,
        t_k,
        residual_rate: report.rate,
        rate_ratio: report.rate / ((k + 1) as f64 * lv.pair.e0),
        translation_defect: defect,
        error: None,
    })
}

/// Runs every cell of the `d x n x k x a` product on the current rayon pool.
pub fn run_sweep(config: &ScenarioConfig) -> Result<SweepReport> {
    config.validate()?;
    let sw = &config.sweep;
    let pairs: Vec<(u32, usize)> = sw
        .d
        .iter()
        .flat_map(|&d| sw.n.iter().map(move |&n| (d, n)))
        .collect();
    let levels: Vec<Level> = pairs
        .par_iter()
        .map(|&(d, n)| level(config, d, n))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize, f64)> = (0..levels.len())
        .flat_map(|l| sw.k.iter().flat_map(move |&k| sw.a.iter().map(move |&a| (l, k, a))))
        .collect();
    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|&(l, k, a)| {
            let lv = &levels[l];
            cell(config, lv, k, a).unwrap_or_else(|e| SweepCell {
                d: lv.d,
                n: lv.n,
                k,
                a,
                e0: lv.pair.e0,
                eigen_residual: lv.residual,
                t_k: f64::NAN,
                residual_rate: f64::NAN,
                rate_ratio: f64::NAN,
                translation_defect: f64::NAN,
                error: Some(e.to_string()),
            })
        })
        .collect();

    let mut orders = Vec::new();
    for &d in &sw.d {
        let mut lv: Vec<&Level> = levels.iter().filter(|l| l.d == d).collect();
        lv.sort_by_key(|l| l.n);
        for w in lv.windows(3) {
            let e = [w[0].pair.e0, w[1].pair.e0, w[2].pair.e0];
            let ratio = w[1].n as f64 / w[0].n as f64;
            let order = ((e[0] - e[1]).abs() / (e[1] - e[2]).abs()).ln() / ratio.ln();
            orders.push(RefinementOrder {
                d,
                n: [w[0].n, w[1].n, w[2].n],
                e0: e,
                order,
            });
        }
    }
    Ok(SweepReport { cells, orders })
}

impl SweepReport {
    /// Ladder, translation and refinement checks at the given tolerances.
    pub fn checks(&self, config: &ScenarioConfig) -> Vec<Check> {
        let mut checks = Vec::new();
        let failed = self.cells.iter().filter(|c| c.error.is_some()).count();
        checks.push(Check::at_most("cells with errors", "experiments", failed as f64, 0.0));
        let worst_rate = self
            .cells
            .iter()
            .map(|c| (c.rate_ratio - 1.0).abs())
            .fold(0.0, |m: f64, x| if x.is_nan() { f64::INFINITY } else { m.max(x) });
        checks.push(Check::at_most(
            "max |rate/((k+1)e0) - 1| over cells",
            "series_builder",
            worst_rate,
            config.series.rate_tolerance,
        ));
        let worst_shift = self
            .cells
            .iter()
            .map(|c| c.translation_defect)
            .fold(0.0, |m: f64, x| if x.is_nan() { f64::INFINITY } else { m.max(x) });
        checks.push(Check::at_most(
            "max translation defect",
            "series_builder",
            worst_shift,
            config.sweep.translation_tolerance,
        ));
        for o in &self.orders {
            checks.push(Check::at_most(
                format!("|e0 refinement order - 2| (d={}, n={:?})", o.d, o.n),
                "linearized_spectrum",
                (o.order - 2.0).abs(),
                config.sweep.order_tolerance,
            ));
        }
        checks
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for c in &self.cells {
            w.serialize(c)?;
        }
        w.flush()?;
        Ok(())
    }
}
