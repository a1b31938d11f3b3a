use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nls_threshold::experiments::{run, ScenarioConfig, ScenarioTag};

#[derive(Parser)]
#[command(name = "nls-threshold", version, about = "Threshold dynamics for radial energy-critical NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario config (JSON); defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root directory for run outputs.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Exit nonzero if any recorded check fails.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample the ground state and check its static identities.
    GroundState,
    /// Compute the unstable eigenpair of the linearized operator.
    Spectrum,
    /// Build a near-solution bundle and measure its residual decay.
    BuildSeries,
    /// Evolve the threshold solutions forward and backward.
    Wpm,
    /// Evolve custom initial data and classify the outcome.
    Classify,
    /// Parameter sweep over dimensions, grids, orders and amplitudes.
    Sweep,
}

impl Command {
    fn tag(self) -> ScenarioTag {
        match self {
            Command::GroundState => ScenarioTag::GroundState,
            Command::Spectrum => ScenarioTag::Spectrum,
            Command::BuildSeries => ScenarioTag::BuildSeries,
            Command::Wpm => ScenarioTag::EvolveNearSolution,
            Command::Classify => ScenarioTag::ClassifyCustom,
            Command::Sweep => ScenarioTag::Sweep,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tag = cli.command.tag();
    let config = match &cli.config {
        Some(path) => match ScenarioConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ScenarioConfig::new(tag),
    };
    if config.scenario != tag {
        eprintln!(
            "error: config scenario `{}` does not match subcommand `{}`",
            config.scenario.as_str(),
            tag.as_str()
        );
        return ExitCode::from(2);
    }
    let manifest = match run(&config, &cli.out, cli.workers) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("{}", manifest.run_dir.display());
    for c in &manifest.checks {
        println!(
            "[{}] {}: {:.6e} {} {:.6e}",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.comparison,
            c.bound
        );
    }
    if cli.check && !manifest.passed() {
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
