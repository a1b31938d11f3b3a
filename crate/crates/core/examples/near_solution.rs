//! Builds `W_k^a` for k = 1..4 and measures how fast its residual decays.

use nls_threshold::series::{default_window, export_bundle, pz_coefficients, residual_rate, NearSolution};
use nls_threshold::spectrum::{build_blocks, ground_mode, EigenOptions};
use nls_threshold::RadialProblem;

fn main() -> nls_threshold::Result<()> {
    let p = RadialProblem::discrete(6, 60.0, 6000)?;
    let blocks = build_blocks(&p);
    let pair = ground_mode(&p, &blocks, &EigenOptions::default())?;
    let table = pz_coefficients(p.grid.dim().critical_exponent(), 12)?;
    println!("e0 = {:.10}", pair.e0);
    println!(" k   t_k      rate/e0  expected");
    let mut last = None;
    for k in 1..=4 {
        let near = NearSolution::build(&blocks, &pair, &p.grid, &table, k, 1.0)?;
        let t_k = near.validity_time(0.5)?;
        let window = default_window(&near, &p.laplacian, &p.grid, t_k)?;
        let report = residual_rate(&near, &p.laplacian, &p.grid, window, 41, 2)?;
        println!("{k:>2}  {t_k:>7.2}  {:>7.3}  {:>3}", report.rate / pair.e0, k + 1);
        last = Some((near, report, t_k));
    }
    let (near, report, t_k) = last.unwrap();
    let dir = std::env::temp_dir().join("nls-threshold-bundle");
    let manifest = export_bundle(&near, &report, t_k, &dir)?;
    println!("bundle with {} profiles written to {}", manifest.profiles.len(), dir.display());
    Ok(())
}
