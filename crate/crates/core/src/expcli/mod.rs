//! Experiment harness: scenario files, the verification experiments, result
//! files and the `sepnet` command line.

pub mod cli;
mod experiments;
mod induction;
mod lemma1;
pub mod output;
mod plotdata;
mod scenario;
mod separation;
mod sweeps;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::infosolvers::SolverError;
use crate::linkcodes::LinkError;
use crate::netmodel::{Diagnostic, NetError};
use crate::probkit::{ProbError, RngStream};

pub use experiments::{
    first_trial_traces, run_capacity, run_rd, run_simulate, run_stack_check, CapacityConfig,
    Experiment, RdConfig, SimulateReport, SolverOutput, StackCheckConfig, StackCheckReport,
};
pub use induction::{two_step_check, TwoStepConfig, TwoStepReport};
pub use lemma1::{
    point_to_point, verify_lemma1, Lemma1Cell, Lemma1Config, Lemma1Report, Realization,
    RepeatOrFresh, Verdict,
};
pub use plotdata::{emit_plotdata, plot_header};
pub use scenario::{load_scenario, parse_scenario, CodeParams, CodeRecipe, Scenario, CODE_NAMES, DEFAULT_TRIALS};
pub use separation::{
    separation_experiment, Quantizer, SeparatedCode, SeparationChecks, SeparationConfig,
    SeparationPoint, SeparationReport,
};
pub use sweeps::{
    chancode_sweep, synth_sweep, ChannelSweepConfig, SweepReport, SweepRow, SynthSweepConfig,
    SWEEP_HEADER,
};

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("invalid network: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Scenario(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("unknown result schema '{0}'")]
    UnknownSchema(String),
}

/// Runs the scenario's experiment with `seed` and `trials`, writing
/// `<kind>.json` (plus CSV tables where the experiment has them) into `out`.
/// Returns the files written.
pub fn run_experiment(
    scenario: &Scenario,
    experiment: &Experiment,
    seed: u64,
    trials: u64,
    out: &Path,
) -> Result<Vec<PathBuf>, ExpError> {
    let rng = RngStream::new(seed);
    let kind = experiment.kind();
    let net = scenario.net.as_ref();
    let mut written = Vec::new();
    let mut write_csv = |name: String, text: String| -> Result<(), ExpError> {
        let path = out.join(name);
        output::write_atomic(&path, text.as_bytes())?;
        written.push(path);
        Ok(())
    };
    let value = match experiment {
        Experiment::Simulate => {
            let recipe = scenario.code_recipe()?;
            let code = recipe.build()?;
            let net = scenario.network()?;
            let report = run_simulate(net, code.as_ref(), &recipe.params(), trials, &rng)?;
            for (e, csv) in first_trial_traces(net, code.as_ref(), &recipe.params(), &rng)?.into_iter().enumerate() {
                write_csv(format!("trace_edge{e}.csv"), csv)?;
            }
            output::envelope(kind, seed, &report)?
        }
        Experiment::Capacity(cfg) => output::envelope(kind, seed, &run_capacity(cfg, net)?)?,
        Experiment::Rd(cfg) => output::envelope(kind, seed, &run_rd(cfg, net)?)?,
        Experiment::StackCheck(cfg) => {
            let recipe = scenario.code_recipe()?;
            let report = run_stack_check(scenario.network()?, recipe.build()?, &recipe.params(), cfg.layers, trials, &rng)?;
            output::envelope(kind, seed, &report)?
        }
        Experiment::ChancodeSweep(cfg) => {
            let report = chancode_sweep(cfg, trials, &rng)?;
            write_csv(format!("{kind}.csv"), output::csv_text(&SWEEP_HEADER, &report.csv_rows()))?;
            output::envelope(kind, seed, &report)?
        }
        Experiment::SynthSweep(cfg) => {
            let report = synth_sweep(cfg, trials, &rng)?;
            write_csv(format!("{kind}.csv"), output::csv_text(&SWEEP_HEADER, &report.csv_rows()))?;
            output::envelope(kind, seed, &report)?
        }
        Experiment::Lemma1(cfg) => output::envelope(kind, seed, &verify_lemma1(cfg, trials, &rng)?)?,
        Experiment::Separation(cfg) => {
            let report = separation_experiment(cfg, trials, &rng)?;
            let mut v = output::envelope(kind, seed, &report)?;
            v["checks"] = serde_json::to_value(report.checks())?;
            v
        }
        Experiment::TwoStep(cfg) => output::envelope(kind, seed, &two_step_check(cfg, trials, &rng)?)?,
    };
    let path = out.join(format!("{kind}.json"));
    output::write_json(&path, &value)?;
    written.push(path);
    Ok(written)
}
