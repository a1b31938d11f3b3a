//! Samples `W` on the reference grid and prints its static diagnostics.
//!
//! `cargo run --release --example ground_state -- [d] [n]`

use nls_threshold::experiments::{extremality_probes, ground_state_summary};
use nls_threshold::RadialProblem;

fn main() -> nls_threshold::Result<()> {
    let mut args = std::env::args().skip(1);
    let d: u32 = args.next().map_or(6, |s| s.parse().expect("d"));
    let n: usize = args.next().map_or(6000, |s| s.parse().expect("n"));
    let problem = RadialProblem::discrete(d, 60.0, n)?;
    let s = ground_state_summary(&problem)?;
    println!("d = {d}, r_max = {}, n = {n}", s.r_max);
    println!("||grad W||^2      {:.12}", s.kinetic);
    println!("||W||_q^q         {:.12}", s.potential);
    println!("E(W)              {:.12}", s.energy);
    println!("|E - K/d| / E     {:.3e}", s.energy_identity_defect);
    println!("Sobolev quotient  {:.12} (sharp {:.12})", s.sobolev_quotient, s.sharp_constant);
    println!("static residual   {:.3e}", s.static_residual);
    println!("max |U - W|       {:.3e}", s.discrete_deviation);

    let probes = extremality_probes(&problem.grid, 1e-3, 25)?;
    let worst = probes.iter().max_by(|a, b| a.change.total_cmp(&b.change)).unwrap();
    println!(
        "largest quotient change over 25 bumps: {:.3e} (centre {:.2}, width {:.2})",
        worst.change, worst.center, worst.width
    );
    Ok(())
}
