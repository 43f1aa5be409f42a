use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linkcodes::{
    build_synthesis_code, continuity_bound, emulate_dmc_over_pipe, index_bits, LinkCodeConfig,
    SynthesisSchedule,
};
use crate::netmodel::codes::UncodedRelay;
use crate::netmodel::{parallel_map, CodeParameters, NetError, Signal};
use crate::probkit::stats::{pooled_stderr, Summary};
use crate::probkit::{l1_slices, EmpiricalJointType, JointPmf, Kernel, Label, ProbVector, RngStream, Role};
use crate::stacking::{lift_code, run_stacked, stack_network, StackedNetwork, StackedTrace};

use super::lemma1::point_to_point;
use super::ExpError;

/// Uncoded sender with `L = 1`, `n = 2` (the symbol goes out twice) over a
/// single link, run on true DMC copies and on synthesis with an independent
/// code per stacked time.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoStepConfig {
    pub channel: Kernel,
    pub layers: usize,
    pub rate: f64,
    pub trials: Option<u64>,
    pub link: LinkCodeConfig,
}

impl Default for TwoStepConfig {
    fn default() -> Self {
        Self {
            channel: Kernel::bsc(0.2).expect("valid crossover"),
            layers: 24,
            rate: 0.6,
            trials: None,
            link: LinkCodeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoStepReport {
    pub layers: usize,
    pub trials: u64,
    /// Pooled over trials and layers, cells `(x1, y1, x2, y2)` in row-major order.
    pub true_law: Vec<f64>,
    pub synthesized_law: Vec<f64>,
    pub tv: f64,
    pub d_true: f64,
    pub d_synth: f64,
    pub pooled_stderr: f64,
    /// Mean over trials and times of `‖p̂ - p‖₁` for the synthesized layer pairs.
    pub mean_l1: f64,
    pub continuity_bound: f64,
}

fn symbol(s: &Signal) -> Result<usize, NetError> {
    s.symbol().ok_or(NetError::BadSignal { edge: 0, time: 0 })
}

fn tuples(trace: &StackedTrace, nx: usize, ny: usize) -> Result<Vec<usize>, NetError> {
    trace.edges[0]
        .iter()
        .map(|lane| {
            let (x1, y1) = (symbol(&lane.inputs[0])?, symbol(&lane.outputs[0])?);
            let (x2, y2) = (symbol(&lane.inputs[1])?, symbol(&lane.outputs[1])?);
            Ok(((x1 * ny + y1) * nx + x2) * ny + y2)
        })
        .collect()
}

fn layer_l1(trace: &StackedTrace, target: &JointPmf, nx: usize, ny: usize) -> Result<f64, ExpError> {
    let mut total = 0.0;
    for t in 0..2 {
        let mut ty = EmpiricalJointType::zeros(nx, ny);
        for lane in &trace.edges[0] {
            ty.push(symbol(&lane.inputs[t])?, symbol(&lane.outputs[t])?)?;
        }
        total += l1_slices(&ty.frequencies(), target.table())?;
    }
    Ok(total / 2.0)
}

pub fn two_step_check(cfg: &TwoStepConfig, trials: u64, rng: &RngStream) -> Result<TwoStepReport, ExpError> {
    let trials = cfg.trials.unwrap_or(trials);
    let (nx, ny) = (cfg.channel.input_size(), cfg.channel.output_size());
    let input = ProbVector::uniform(nx);
    let base = point_to_point(&cfg.channel);
    let truth: StackedNetwork = stack_network(&base, cfg.layers)?;
    let codes = (1..=2)
        .map(|t| {
            let key = rng.child(Role::Codebook).child(Label::Time(t));
            build_synthesis_code(&input, &cfg.channel, cfg.layers, cfg.rate, &key, &cfg.link).map(Arc::new)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pipe_rate = index_bits(cfg.layers, cfg.rate) as f64 / cfg.layers as f64;
    let synth = emulate_dmc_over_pipe(truth.clone(), 0, SynthesisSchedule::PerTime(codes), pipe_rate)?;
    let code = lift_code(Arc::new(UncodedRelay), cfg.layers)?;
    let params = CodeParameters::new(1, 2);
    let target = JointPmf::from_input_and_channel(&input, &cfg.channel)?;

    let cells = nx * ny * nx * ny;
    let trial_rng = rng.child(Role::Trial);
    let runs = parallel_map(trials, |i| {
        let trial = trial_rng.trial(i);
        let a = run_stacked(&truth, &code, &params, &trial)?;
        let b = run_stacked(&synth, &code, &params, &trial)?;
        Ok::<_, ExpError>((
            tuples(&a, nx, ny)?,
            tuples(&b, nx, ny)?,
            a.demands[0].distortion,
            b.demands[0].distortion,
            layer_l1(&b, &target, nx, ny)?,
        ))
    })?;
    let mut true_counts = vec![0u64; cells];
    let mut synth_counts = vec![0u64; cells];
    let (mut d_true, mut d_synth, mut l1) = (Summary::new(), Summary::new(), Summary::new());
    for (a, b, da, db, e) in &runs {
        for &c in a {
            true_counts[c] += 1;
        }
        for &c in b {
            synth_counts[c] += 1;
        }
        d_true.push(*da);
        d_synth.push(*db);
        l1.push(*e);
    }
    let total = (trials as usize * cfg.layers).max(1) as f64;
    let true_law: Vec<f64> = true_counts.iter().map(|&c| c as f64 / total).collect();
    let synthesized_law: Vec<f64> = synth_counts.iter().map(|&c| c as f64 / total).collect();
    let tv = 0.5 * l1_slices(&true_law, &synthesized_law)?;
    Ok(TwoStepReport {
        layers: cfg.layers,
        trials,
        true_law,
        synthesized_law,
        tv,
        d_true: d_true.mean(),
        d_synth: d_synth.mean(),
        pooled_stderr: pooled_stderr(d_true.stderr(), d_synth.stderr()),
        mean_l1: l1.mean(),
        continuity_bound: continuity_bound(base.d_max(), l1.mean()),
    })
}
