//! Evolves scaled copies of `W` and classifies each trajectory.
//!
//! Factors below one disperse; factors above one blow up.

use nls_threshold::diagnostics::{classify, Thresholds};
use nls_threshold::evolver::{energy_drift, evolve, EvolverConfig};
use nls_threshold::RadialProblem;

fn main() -> nls_threshold::Result<()> {
    let p = RadialProblem::discrete(6, 60.0, 3000)?;
    let config = EvolverConfig::default();
    let w = p.ground.field(&p.grid);
    for factor in [0.8, 0.9, 1.0, 1.1] {
        let trace = evolve(&p, &w.scale(factor.into()), [0.0, 150.0], &config)?;
        let report = classify(&trace, &Thresholds::default())?;
        println!(
            "factor {factor:.2}: {:?}, kinetic {:?}, {} steps, horizon {:.0}, drift {:.1e}, termination {:?}",
            report.regime,
            report.kinetic_side,
            trace.steps,
            trace.reflection_horizon,
            energy_drift(&trace),
            trace.termination
        );
    }
    Ok(())
}
