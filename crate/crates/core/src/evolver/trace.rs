use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discretization::RadialField;
use crate::error::Result;

/// Diagnostics recorded at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub energy: f64,
    /// `||grad u||_{L^2}`.
    pub kinetic: f64,
    pub max_amp: f64,
    /// Modulated `H^1` distance to the ground-state family.
    pub distance: f64,
    pub theta: f64,
    pub mu: f64,
}

/// Ground-state values the trace is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub kinetic: f64,
    pub max_amp: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Termination {
    Completed {
        t: f64,
    },
    BlowupDetected {
        t_star: f64,
        bracket: [f64; 2],
        max_amp: f64,
        kinetic: f64,
        cause: String,
    },
    #[serde(rename = "nan")]
    NonFinite {
        t: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: RadialField,
}

/// Samples and termination record of one integration.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub scheme: String,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: Vec<TraceSample>,
    pub termination: Termination,
    pub reference: Reference,
    /// Elapsed time for a wave at the datum's group speed to cross the
    /// domain and return.
    pub reflection_horizon: f64,
    pub steps: usize,
    pub min_dt: f64,
    pub max_iterations: usize,
    pub snapshots: Vec<Snapshot>,
    pub final_state: RadialField,
}

/// JSON companion of the trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationRecord {
    pub scheme: String,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub termination: Termination,
    pub reference: Reference,
    pub reflection_horizon: f64,
    pub energy_drift: f64,
    pub steps: usize,
    pub min_dt: f64,
    pub max_fixed_point_iterations: usize,
}

impl EvolutionTrace {
    /// `+1` for forward runs, `-1` for backward runs.
    pub fn direction(&self) -> f64 {
        if self.t_end >= self.t_start {
            1.0
        } else {
            -1.0
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn record(&self) -> TerminationRecord {
        TerminationRecord {
            scheme: self.scheme.clone(),
            dt: self.dt,
            t_start: self.t_start,
            t_end: self.t_end,
            termination: self.termination.clone(),
            reference: self.reference,
            reflection_horizon: self.reflection_horizon,
            energy_drift: energy_drift(self),
            steps: self.steps,
            min_dt: self.min_dt,
            max_fixed_point_iterations: self.max_iterations,
        }
    }

    /// Writes `t,E,kinetic,max_amp,h1_dist_to_modW,theta_fit,mu_fit`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "E", "kinetic", "max_amp", "h1_dist_to_modW", "theta_fit", "mu_fit"])?;
        for s in &self.samples {
            w.serialize((s.t, s.energy, s.kinetic, s.max_amp, s.distance, s.theta, s.mu))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the trace CSV and its termination JSON.
    pub fn export(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
        self.write_csv(file)?;
        std::fs::write(json_path, serde_json::to_vec_pretty(&self.record())?)?;
        Ok(())
    }
}

/// Largest relative energy deviation from the first sample.
pub fn energy_drift(trace: &EvolutionTrace) -> f64 {
    let Some(first) = trace.samples.first() else {
        return 0.0;
    };
    let e0 = first.energy;
    let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
    trace
        .samples
        .iter()
        .map(|s| (s.energy - e0).abs() / scale)
        .fold(0.0, f64::max)
}
