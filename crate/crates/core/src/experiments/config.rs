use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::Thresholds;
use crate::error::{Error, Result};
use crate::evolver::EvolverConfig;
use crate::ground_state::ProfileKind;
use crate::spectrum::EigenOptions;

pub const CONFIG_SCHEMA: &str = "nls-threshold/scenario-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioTag {
    GroundState,
    Spectrum,
    BuildSeries,
    EvolveNearSolution,
    ClassifyCustom,
    Sweep,
}

impl ScenarioTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioTag::GroundState => "ground-state",
            ScenarioTag::Spectrum => "spectrum",
            ScenarioTag::BuildSeries => "build-series",
            ScenarioTag::EvolveNearSolution => "evolve-near-solution",
            ScenarioTag::ClassifyCustom => "classify-custom",
            ScenarioTag::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub d: u32,
    pub r_max: f64,
    pub n: usize,
    pub profile: ProfileKind,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            d: 6,
            r_max: 60.0,
            n: 6000,
            profile: ProfileKind::Discrete,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesConfig {
    pub k: usize,
    pub a: f64,
    /// Highest order kept in the expansion table.
    pub j_max: usize,
    /// `max |v_k| / W` defining the validity time `t_k`.
    pub validity_ratio: f64,
    /// `max |v_k| / W` at which dynamical runs are seeded.
    pub seed_ratio: f64,
    pub residual_samples: usize,
    /// Weight exponent of the weighted sup-norm residual.
    pub residual_weight: i32,
    /// Allowed relative error of the residual decay rate against `(k+1) e0`.
    pub rate_tolerance: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            k: 4,
            a: 1.0,
            j_max: 12,
            validity_ratio: 0.5,
            seed_ratio: 0.05,
            residual_samples: 41,
            residual_weight: 2,
            rate_tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WpmConfig {
    /// Sign of `a`; `-1` or `+1`.
    pub sign: i32,
    /// Forward run length in units of `1/e0`.
    pub forward_span: f64,
    /// Backward run length in units of `1/e0`.
    pub backward_span: f64,
    /// Allowed relative error of the fitted convergence rate against `e0`.
    pub rate_tolerance: f64,
    /// Repeat the backward run at `dt/2` and compare blowup times.
    pub refine_blowup: bool,
    /// Allowed relative change of the elapsed time to blowup under refinement.
    pub blowup_time_tolerance: f64,
}

impl Default for WpmConfig {
    fn default() -> Self {
        WpmConfig {
            sign: -1,
            forward_span: 8.0,
            backward_span: 25.0,
            rate_tolerance: 0.15,
            refine_blowup: true,
            blowup_time_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `factor * W`.
    ScaledGroundState { factor: f64 },
    /// `W_k^a` at its seed time.
    NearSolution { a: f64, k: usize },
    /// A field CSV on the configured grid.
    Field { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    pub initial: InitialData,
    /// Integration interval; the end may precede the start.
    pub t_span: [f64; 2],
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            initial: InitialData::ScaledGroundState { factor: 1.2 },
            t_span: [0.0, 60.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub d: Vec<u32>,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub a: Vec<f64>,
    /// Allowed distance of the observed refinement order of `e0` from 2.
    pub order_tolerance: f64,
    /// Allowed relative defect of the time-translation identity.
    pub translation_tolerance: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            d: vec![6],
            n: vec![1500, 3000, 6000],
            k: vec![1, 2, 3, 4],
            a: vec![-2.0, -1.0, 0.5, 1.0],
            order_tolerance: 0.5,
            translation_tolerance: 1e-12,
        }
    }
}

/// Versioned description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    pub scenario: ScenarioTag,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub eigen: EigenOptions,
    #[serde(default)]
    pub series: SeriesConfig,
    #[serde(default)]
    pub evolver: EvolverConfig,
    #[serde(default)]
    pub wpm: WpmConfig,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioTag) -> Self {
        ScenarioConfig {
            schema: CONFIG_SCHEMA.to_string(),
            scenario,
            grid: GridConfig::default(),
            eigen: EigenOptions::default(),
            series: SeriesConfig::default(),
            evolver: EvolverConfig::default(),
            wpm: WpmConfig::default(),
            classify: ClassifyConfig::default(),
            sweep: SweepConfig::default(),
            thresholds: Thresholds::default(),
        }
    }

    /// Parses and validates a JSON config; errors carry the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(&path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(invalid(
                "schema",
                format!("expected `{CONFIG_SCHEMA}`, got `{}`", self.schema),
            ));
        }
        let g = &self.grid;
        if g.d < 3 {
            return Err(invalid("grid.d", format!("need d >= 3, got {}", g.d)));
        }
        if !(g.r_max.is_finite() && g.r_max > 0.0) {
            return Err(invalid("grid.r_max", "must be positive"));
        }
        if g.n < 16 {
            return Err(invalid("grid.n", "need at least 16 intervals"));
        }
        if self.eigen.coarse_n < 16 || !(self.eigen.tol > 0.0) || self.eigen.max_iter == 0 {
            return Err(invalid("eigen", "coarse_n >= 16, tol > 0 and max_iter > 0 required"));
        }
        let s = &self.series;
        if s.k == 0 {
            return Err(invalid("series.k", "must be at least 1"));
        }
        if s.j_max < s.k + 1 {
            return Err(invalid("series.j_max", "must be at least k + 1"));
        }
        if !s.a.is_finite() {
            return Err(invalid("series.a", "must be finite"));
        }
        for (name, v) in [("series.validity_ratio", s.validity_ratio), ("series.seed_ratio", s.seed_ratio)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(name, "must lie in (0, 1)"));
            }
        }
        if s.residual_samples < 5 {
            return Err(invalid("series.residual_samples", "need at least 5"));
        }
        if !(s.rate_tolerance > 0.0) {
            return Err(invalid("series.rate_tolerance", "must be positive"));
        }
        self.evolver
            .validate()
            .map_err(|e| invalid("evolver", e.to_string()))?;
        let w = &self.wpm;
        if w.sign != 1 && w.sign != -1 {
            return Err(invalid("wpm.sign", "must be -1 or 1"));
        }
        if !(w.forward_span > 0.0 && w.backward_span > 0.0) {
            return Err(invalid("wpm.forward_span", "spans must be positive"));
        }
        if !(w.rate_tolerance > 0.0 && w.blowup_time_tolerance > 0.0) {
            return Err(invalid("wpm.rate_tolerance", "tolerances must be positive"));
        }
        let c = &self.classify;
        if !(c.t_span[0].is_finite() && c.t_span[1].is_finite()) || c.t_span[0] == c.t_span[1] {
            return Err(invalid("classify.t_span", "need two distinct finite times"));
        }
        match &c.initial {
            InitialData::ScaledGroundState { factor } if !factor.is_finite() => {
                return Err(invalid("classify.initial.factor", "must be finite"));
            }
            InitialData::NearSolution { k, a } if *k == 0 || !a.is_finite() => {
                return Err(invalid("classify.initial", "need k >= 1 and finite a"));
            }
            _ => {}
        }
        let sw = &self.sweep;
        if sw.d.is_empty() || sw.n.is_empty() || sw.k.is_empty() || sw.a.is_empty() {
            return Err(invalid("sweep", "every range needs at least one value"));
        }
        if sw.d.iter().any(|&d| d < 3) {
            return Err(invalid("sweep.d", "need d >= 3"));
        }
        if sw.n.iter().any(|&n| n < 16) {
            return Err(invalid("sweep.n", "need n >= 16"));
        }
        if sw.k.iter().any(|&k| k == 0 || k + 1 > s.j_max) {
            return Err(invalid("sweep.k", "need 1 <= k < series.j_max"));
        }
        if sw.a.iter().any(|a| *a == 0.0 || !a.is_finite()) {
            return Err(invalid("sweep.a", "need finite nonzero amplitudes"));
        }
        let t = &self.thresholds;
        if !(t.converge_distance > 0.0 && t.min_decay_factor > 1.0 && t.scattering_ratio > 0.0 && t.kinetic_deadband >= 0.0) {
            return Err(invalid("thresholds", "converge_distance > 0, min_decay_factor > 1, scattering_ratio > 0"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ScenarioConfig::new(ScenarioTag::Spectrum);
        let back = ScenarioConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_name_the_field() {
        let text = r#"{"schema": "nls-threshold/scenario-v1", "scenario": "spectrum", "grid": {"n": "many"}}"#;
        match ScenarioConfig::from_json(text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "grid.n"),
            other => panic!("{other:?}"),
        }
        let text = r#"{"schema": "nls-threshold/scenario-v1", "scenario": "spectrum", "evolver": {"dt": 1e-12}}"#;
        assert!(matches!(ScenarioConfig::from_json(text), Err(Error::Config { .. })));
        let text = r#"{"schema": "v0", "scenario": "spectrum"}"#;
        assert!(matches!(ScenarioConfig::from_json(text), Err(Error::Config { path, .. }) if path == "schema"));
    }
}
