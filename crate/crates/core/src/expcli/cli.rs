use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use super::{
    emit_plotdata, load_scenario, output, run_experiment, CapacityConfig, ChannelSweepConfig,
    Experiment, ExpError, Lemma1Config, RdConfig, Scenario, SeparationConfig, StackCheckConfig,
    SynthSweepConfig, TwoStepConfig,
};

#[derive(Debug, Parser)]
#[command(name = "sepnet", version, about = "Separation experiments on networks of noisy links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the scenario trial count.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Output directory; defaults to the scenario's `output`, then `results`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity of a given channel or of every DMC edge.
    Capacity(RunArgs),
    /// Rate–distortion function at a target distortion.
    Rd(RunArgs),
    /// Monte Carlo distortion matrix of the scenario code.
    Simulate(RunArgs),
    /// Lift, de-stack and compare on coupled streams.
    StackCheck(RunArgs),
    /// Block error rate sweep of random channel codes.
    ChancodeSweep(RunArgs),
    /// Empirical-type TV sweep of synthesis codes.
    SynthSweep(RunArgs),
    /// Conditional-independence check across stacked times.
    Lemma1(RunArgs),
    /// Separated scheme over a coded noisy link and over a capacity pipe.
    Separation(RunArgs),
    /// Joint law of two stacked times under per-time synthesis.
    TwoStep(RunArgs),
    /// Whatever experiment the scenario names.
    Run(RunArgs),
    /// Tidy CSV from a result JSON file.
    Plotdata {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// The scenario's own experiment when its kind matches `kind`, otherwise the
/// default configuration of `kind`.
fn experiment_for(scenario: &Scenario, kind: &str) -> Experiment {
    if scenario.experiment.kind() == kind {
        return scenario.experiment.clone();
    }
    match kind {
        "capacity" => Experiment::Capacity(CapacityConfig::default()),
        "rd" => Experiment::Rd(RdConfig::default()),
        "stack-check" => Experiment::StackCheck(StackCheckConfig::default()),
        "chancode-sweep" => Experiment::ChancodeSweep(ChannelSweepConfig::default()),
        "synth-sweep" => Experiment::SynthSweep(SynthSweepConfig::default()),
        "lemma1" => Experiment::Lemma1(Lemma1Config::default()),
        "separation" => Experiment::Separation(SeparationConfig::default()),
        "two-step" => Experiment::TwoStep(TwoStepConfig::default()),
        _ => Experiment::Simulate,
    }
}

fn run(args: &RunArgs, kind: Option<&str>) -> Result<Vec<PathBuf>, ExpError> {
    let scenario = load_scenario(&args.scenario)?;
    let experiment = match kind {
        Some(k) => experiment_for(&scenario, k),
        None => scenario.experiment.clone(),
    };
    let out = args
        .out
        .clone()
        .or_else(|| scenario.output.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let seed = args.seed.unwrap_or(scenario.seed);
    let trials = args.trials.unwrap_or(scenario.trials);
    run_experiment(&scenario, &experiment, seed, trials, &out)
}

fn plotdata(input: &Path, out: &Path) -> Result<Vec<PathBuf>, ExpError> {
    let text = std::fs::read_to_string(input)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let csv = emit_plotdata(&value)?;
    let stem = input.file_stem().map_or("result".into(), |s| s.to_string_lossy().into_owned());
    let path = out.join(format!("{stem}.plot.csv"));
    output::write_atomic(&path, csv.as_bytes())?;
    Ok(vec![path])
}

pub fn execute(cli: Cli) -> Result<Vec<PathBuf>, ExpError> {
    match &cli.command {
        Command::Capacity(a) => run(a, Some("capacity")),
        Command::Rd(a) => run(a, Some("rd")),
        Command::Simulate(a) => run(a, Some("simulate")),
        Command::StackCheck(a) => run(a, Some("stack-check")),
        Command::ChancodeSweep(a) => run(a, Some("chancode-sweep")),
        Command::SynthSweep(a) => run(a, Some("synth-sweep")),
        Command::Lemma1(a) => run(a, Some("lemma1")),
        Command::Separation(a) => run(a, Some("separation")),
        Command::TwoStep(a) => run(a, Some("two-step")),
        Command::Run(a) => run(a, None),
        Command::Plotdata { input, out } => plotdata(input, out),
    }
}

/// Entry point of the `sepnet` binary. Diagnostics go to stderr; validation
/// failures exit with 2, other failures with 1.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match execute(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            eprintln!("done in {:.2}s", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(ExpError::Invalid(diags)) => {
            for d in &diags {
                eprintln!("error: {d}");
                if let Ok(json) = serde_json::to_string(d) {
                    eprintln!("  {json}");
                }
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
