use serde::{Deserialize, Serialize};

use crate::infosolvers::{blahut_capacity, blahut_rate_distortion, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE};
use crate::netmodel::{
    estimate_distortion, parallel_map, run_block, ChannelSpec, CodeParameters, CodingPolicy,
    DistortionMatrix, NetworkSpec,
};
use crate::probkit::stats::Summary;
use crate::probkit::{DistortionMeasure, Kernel, ProbVector, RngStream};
use crate::stacking::{destack_code, lift_code, run_stacked, stack_network, InterleaveSchedule, StackedCode};

use super::induction::TwoStepConfig;
use super::lemma1::Lemma1Config;
use super::separation::SeparationConfig;
use super::sweeps::{ChannelSweepConfig, SynthSweepConfig};
use super::ExpError;

/// The experiment a scenario asks for, tagged by `kind`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    Capacity(CapacityConfig),
    Rd(RdConfig),
    StackCheck(StackCheckConfig),
    ChancodeSweep(ChannelSweepConfig),
    SynthSweep(SynthSweepConfig),
    Lemma1(Lemma1Config),
    Separation(SeparationConfig),
    TwoStep(TwoStepConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Capacity(_) => "capacity",
            Experiment::Rd(_) => "rd",
            Experiment::StackCheck(_) => "stack-check",
            Experiment::ChancodeSweep(_) => "chancode-sweep",
            Experiment::SynthSweep(_) => "synth-sweep",
            Experiment::Lemma1(_) => "lemma1",
            Experiment::Separation(_) => "separation",
            Experiment::TwoStep(_) => "two-step",
        }
    }
}

/// Solves one given channel, or every DMC edge of the scenario network.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    pub channel: Option<Kernel>,
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            channel: None,
            tolerance: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

/// Solves one given source, or the source marginal of every demand.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RdConfig {
    pub source: Option<ProbVector>,
    /// Hamming when omitted.
    pub distortion: Option<DistortionMeasure>,
    pub target_distortion: f64,
    pub tolerance: f64,
}

impl Default for RdConfig {
    fn default() -> Self {
        Self {
            source: None,
            distortion: None,
            target_distortion: 0.0,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StackCheckConfig {
    pub layers: usize,
}

impl Default for StackCheckConfig {
    fn default() -> Self {
        Self { layers: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverOutput {
    /// Edge or demand index the value belongs to, when taken from a network.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub optimizer: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distortion: Option<f64>,
}

pub fn run_capacity(cfg: &CapacityConfig, net: Option<&NetworkSpec>) -> Result<Vec<SolverOutput>, ExpError> {
    let targets: Vec<(Option<usize>, &Kernel)> = match (&cfg.channel, net) {
        (Some(k), _) => vec![(None, k)],
        (None, Some(net)) => net
            .edges
            .iter()
            .enumerate()
            .filter_map(|(e, edge)| match &edge.channel {
                ChannelSpec::Dmc(k) => Some((Some(e), k)),
                ChannelSpec::BitPipe { .. } => None,
            })
            .collect(),
        (None, None) => return Err(ExpError::Scenario("capacity needs a channel or a network".into())),
    };
    targets
        .into_iter()
        .map(|(index, k)| {
            let r = blahut_capacity(k, cfg.tolerance, cfg.max_iters)?;
            Ok(SolverOutput {
                index,
                value: r.capacity,
                gap: r.gap,
                iterations: r.iterations,
                optimizer: serde_json::to_value(r.optimal_input.as_slice())?,
                distortion: None,
            })
        })
        .collect()
}

pub fn run_rd(cfg: &RdConfig, net: Option<&NetworkSpec>) -> Result<Vec<SolverOutput>, ExpError> {
    let targets: Vec<(Option<usize>, ProbVector, DistortionMeasure)> = match (&cfg.source, net) {
        (Some(p), _) => {
            let d = cfg.distortion.clone().unwrap_or_else(|| DistortionMeasure::hamming(p.len()));
            vec![(None, p.clone(), d)]
        }
        (None, Some(net)) => net
            .demands
            .iter()
            .enumerate()
            .map(|(i, d)| (Some(i), net.sources.marginal(d.source), d.distortion.clone()))
            .collect(),
        (None, None) => return Err(ExpError::Scenario("rd needs a source or a network".into())),
    };
    targets
        .into_iter()
        .map(|(index, p, d)| {
            let r = blahut_rate_distortion(&p, &d, cfg.target_distortion, cfg.tolerance)?;
            Ok(SolverOutput {
                index,
                value: r.rate,
                gap: r.gap,
                iterations: r.iterations,
                optimizer: serde_json::to_value(r.test_channel.rows())?,
                distortion: Some(r.distortion),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub code: String,
    pub params: CodeParameters,
    pub distortion: DistortionMatrix,
}

pub fn run_simulate(
    net: &NetworkSpec,
    code: &dyn CodingPolicy,
    params: &CodeParameters,
    trials: u64,
    rng: &RngStream,
) -> Result<SimulateReport, ExpError> {
    code.check(net, params)?;
    Ok(SimulateReport {
        code: code.name().to_string(),
        params: *params,
        distortion: estimate_distortion(net, code, params, trials, rng)?,
    })
}

/// Per-edge `t,x,y` CSV of trial 0.
pub fn first_trial_traces(
    net: &NetworkSpec,
    code: &dyn CodingPolicy,
    params: &CodeParameters,
    rng: &RngStream,
) -> Result<Vec<String>, ExpError> {
    let trace = run_block(net, code, params, &rng.trial(0))?;
    Ok((0..net.edges.len()).map(|e| trace.edge_csv(e)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackCheckReport {
    pub layers: usize,
    pub trials: u64,
    /// Mean per demand.
    pub stacked_distortion: Vec<f64>,
    pub destacked_distortion: Vec<f64>,
    pub stderr: Vec<f64>,
    pub exact_match: bool,
    pub mismatched_trials: u64,
}

/// Lifts `code` to `layers` layers, de-stacks the lift, and checks on coupled
/// streams that the de-stacked run replays the stacked one: every edge's
/// `(x, y)` at single-layer time `τ` equals lane `ℓ` at stacked time `t`
/// where `τ = (t - 1)N + ℓ`, and reconstructions agree.
pub fn run_stack_check(
    net: &NetworkSpec,
    code: std::sync::Arc<dyn CodingPolicy>,
    params: &CodeParameters,
    layers: usize,
    trials: u64,
    rng: &RngStream,
) -> Result<StackCheckReport, ExpError> {
    code.check(net, params)?;
    let stacked_net = stack_network(net, layers)?;
    let lifted: std::sync::Arc<dyn StackedCode> = std::sync::Arc::new(lift_code(code, layers)?);
    let (single, single_params) = destack_code(lifted.clone(), params);
    let schedule = InterleaveSchedule::new(layers, params.channel_uses);
    let per_trial = parallel_map(trials, |i| {
        let trial = rng.trial(i);
        let s = run_stacked(&stacked_net, lifted.as_ref(), params, &trial)?;
        let d = run_block(net, single.as_ref(), &single_params, &trial)?;
        let mut exact = d.demands.len() == s.demands.len();
        for e in 0..net.edges.len() {
            for tau in 1..=schedule.total_time() {
                let (l, t) = schedule.inverse(tau);
                let lane = &s.edges[e][l - 1];
                exact &= d.edges[e].inputs[tau - 1] == lane.inputs[t - 1]
                    && d.edges[e].outputs[tau - 1] == lane.outputs[t - 1];
            }
        }
        for (a, b) in d.demands.iter().zip(&s.demands) {
            exact &= a.reconstruction == b.reconstruction && a.distortion == b.distortion;
        }
        Ok::<_, ExpError>((s.distortions(), d.distortions(), exact))
    })?;
    let demands = net.demands.len();
    let mut stacked = vec![Summary::new(); demands];
    let mut destacked = vec![Summary::new(); demands];
    let mut mismatched = 0;
    for (s, d, exact) in &per_trial {
        for k in 0..demands {
            stacked[k].push(s[k]);
            destacked[k].push(d[k]);
        }
        mismatched += u64::from(!exact);
    }
    Ok(StackCheckReport {
        layers,
        trials,
        stacked_distortion: stacked.iter().map(Summary::mean).collect(),
        destacked_distortion: destacked.iter().map(Summary::mean).collect(),
        stderr: stacked.iter().map(Summary::stderr).collect(),
        exact_match: mismatched == 0,
        mismatched_trials: mismatched,
    })
}
