//! Forward and backward runs of the two threshold solutions.
//!
//! Takes about a minute in release mode.

use nls_threshold::experiments::canonical_wpm;

fn main() -> nls_threshold::Result<()> {
    for sign in [-1, 1] {
        let o = canonical_wpm(6, sign)?;
        let label = if sign < 0 { "W-" } else { "W+" };
        println!("{label}: seeded at t = {:.3} (E offset {:.2e})", o.seed.t_seed, o.seed.energy_defect);
        let f = &o.forward_report;
        println!(
            "  forward : {:?}, rate/e0 = {:.3}, kinetic {:?}, theta = {:.4}, mu = {:.6}",
            f.regime,
            f.rate.unwrap_or(f64::NAN) / o.e0,
            f.kinetic_side,
            f.theta,
            f.mu
        );
        println!("  backward: {:?}, {:?}", o.backward_report.regime, o.backward.termination);
        for c in &o.checks {
            println!("  [{}] {}", if c.passed { "ok" } else { "FAILED" }, c.name);
        }
    }
    Ok(())
}
