//! Small parameter sweep written to a run directory.

use nls_threshold::experiments::{run, ScenarioConfig, ScenarioTag};

fn main() -> nls_threshold::Result<()> {
    let mut config = ScenarioConfig::new(ScenarioTag::Sweep);
    config.sweep.n = vec![1000, 2000, 4000];
    config.sweep.a = vec![-1.0, 0.5, 2.0];
    let out = std::env::temp_dir().join("nls-threshold-runs");
    let manifest = run(&config, &out, None)?;
    println!("run directory: {}", manifest.run_dir.display());
    for c in &manifest.checks {
        println!("[{}] {} = {:.3e}", if c.passed { "pass" } else { "FAIL" }, c.name, c.value);
    }
    Ok(())
}
