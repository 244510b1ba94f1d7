//! Command-line front end for the jammed age-of-information toolkit.
//!
//! A scenario is a single JSON document (see [`scenario::ScenarioConfig`]);
//! each subcommand runs one experiment on it, prints a summary and writes
//! CSV and JSON results to the output directory.

pub mod error;
pub mod experiment;
pub mod export;
pub mod scenario;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, Result};
pub use experiment::Outcome;
pub use scenario::{Experiment, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(
    name = "aoijam",
    version,
    about = "Age-of-information scheduling games against a jamming adversary"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact finite-horizon expected-age trajectories.
    Exact(CommonArgs),
    /// Large-horizon closed-form ages.
    Asymptotic(CommonArgs),
    /// Monte Carlo estimate of the time-averaged age.
    Simulate(CommonArgs),
    /// Best responses of both players.
    BestResponse(CommonArgs),
    /// Exhaustive adversary search on a small instance.
    Oracle(CommonArgs),
    /// Alternating best-response dynamics without diversity.
    BrDynamics(CommonArgs),
    /// Stackelberg point with a sampled certificate.
    Stackelberg(CommonArgs),
    /// Check a strategy pair for profitable unilateral deviations.
    NashVerify(CommonArgs),
    /// Run the experiment named in the scenario file.
    Run(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for CSV and JSON results.
    #[arg(long, env = "AOIJAM_OUT_DIR", default_value = "aoijam-out")]
    pub out_dir: PathBuf,
    /// Replace the seed of randomized experiments.
    #[arg(long)]
    pub seed_override: Option<u64>,
    /// Suppress the summary on standard output.
    #[arg(long)]
    pub quiet: bool,
}

impl Command {
    fn parts(&self) -> (Option<&'static str>, &CommonArgs) {
        match self {
            Command::Exact(a) => (Some("exact"), a),
            Command::Asymptotic(a) => (Some("asymptotic"), a),
            Command::Simulate(a) => (Some("simulate"), a),
            Command::BestResponse(a) => (Some("best-response"), a),
            Command::Oracle(a) => (Some("oracle"), a),
            Command::BrDynamics(a) => (Some("br-dynamics"), a),
            Command::Stackelberg(a) => (Some("stackelberg"), a),
            Command::NashVerify(a) => (Some("nash-verify"), a),
            Command::Run(a) => (None, a),
        }
    }
}

/// Picks the experiment for a subcommand. Parameters come from the scenario
/// when it names the same experiment, otherwise defaults apply.
pub fn select_experiment(scenario: &ScenarioConfig, name: Option<&str>) -> Result<Experiment> {
    match (name, &scenario.experiment) {
        (None, Some(e)) => Ok(e.clone()),
        (None, None) => Err(CliError::validation(
            "experiment",
            "`run` needs an experiment in the scenario",
        )),
        (Some(name), Some(e)) if e.name() == name => Ok(e.clone()),
        (Some(name), _) => {
            Ok(Experiment::default_for(name).expect("subcommand names a known experiment"))
        }
    }
}

/// Loads the scenario, runs the experiment and writes the results.
pub fn execute(command: &Command) -> Result<(ScenarioConfig, Outcome)> {
    let (name, args) = command.parts();
    let scenario = ScenarioConfig::load(&args.config)?;
    let mut experiment = select_experiment(&scenario, name)?;
    if let (Some(seed), Some(slot)) = (args.seed_override, experiment.seed_mut()) {
        *slot = seed;
    }
    log::info!("running {} on {}", experiment.name(), args.config.display());
    let outcome = experiment::run(&scenario, &experiment)?;
    write_outputs(&args.out_dir, &scenario, &experiment, &outcome)?;
    if !args.quiet {
        print!("{}", outcome.summary(&scenario));
    }
    Ok((scenario, outcome))
}

/// Writes the resolved scenario (with the experiment actually run) and the results.
pub fn write_outputs(
    dir: &Path,
    scenario: &ScenarioConfig,
    experiment: &Experiment,
    outcome: &Outcome,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Write {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut resolved = scenario.clone();
    resolved.experiment = Some(experiment.clone());
    std::fs::write(dir.join(export::SCENARIO_FILE), resolved.to_json() + "\n").map_err(|e| {
        CliError::Write {
            path: dir.join(export::SCENARIO_FILE),
            message: e.to_string(),
        }
    })?;
    outcome.export(dir)
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match execute(&cli.command) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
