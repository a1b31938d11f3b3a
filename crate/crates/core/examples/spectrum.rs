//! Unstable eigenpair of the linearized operator, with its refinement
//! behaviour and an export round trip.

use nls_threshold::spectrum::{build_blocks, eigen_residual, export_eigenpair, ground_mode, import_eigenpair, EigenOptions};
use nls_threshold::RadialProblem;

fn main() -> nls_threshold::Result<()> {
    let opts = EigenOptions::default();
    for n in [1500, 3000, 6000, 12000] {
        let p = RadialProblem::discrete(6, 60.0, n)?;
        let blocks = build_blocks(&p);
        let t = std::time::Instant::now();
        let pair = ground_mode(&p, &blocks, &opts)?;
        let res = eigen_residual(&blocks, &pair)?;
        println!(
            "n = {n:>5}  e0 = {:.12}  residual = {res:.2e}  y1(0) = {:.6}  ({:.2?})",
            pair.e0,
            pair.y1[0],
            t.elapsed()
        );
    }

    let p = RadialProblem::discrete(6, 60.0, 6000)?;
    let blocks = build_blocks(&p);
    let pair = ground_mode(&p, &blocks, &opts)?;
    let res = eigen_residual(&blocks, &pair)?;
    let dir = std::env::temp_dir().join("nls-threshold-spectrum");
    std::fs::create_dir_all(&dir)?;
    let (csv, json) = (dir.join("eigenfunction.csv"), dir.join("eigenfunction.json"));
    export_eigenpair(&pair, res, &p.grid, &csv, &json)?;
    let (back, side) = import_eigenpair(&csv, &json)?;
    println!("exported to {} (e0 = {}, round trip exact: {})", dir.display(), side.e0, back == pair);
    Ok(())
}
