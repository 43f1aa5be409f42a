use serde::{Deserialize, Serialize};

use crate::linkcodes::{emulate_dmc_over_pipe, index_bits, LinkCodeConfig, SynthesisSchedule};
use crate::netmodel::{
    parallel_map, ChannelSpec, CodeParameters, Demand, Edge, NetError, NetworkSpec, NodeId, Signal,
    SourceModel,
};
use crate::probkit::stats::two_proportion_z;
use crate::probkit::{DistortionMeasure, Kernel, Label, ProbVector, RngStream};
use crate::stacking::{
    run_stacked, stack_network, StackedCode, StackedDecoderView, StackedEncoderView, StackedNetwork,
};

use super::ExpError;

/// How the link's layer outputs are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Realization {
    /// Independent copies of the DMC.
    Dmc,
    /// A fresh synthesis codebook and selection draw per trial and time.
    Synthesis,
    /// Synthesis that reuses the time-1 codebook and selection draw at time 2.
    ReusedSynthesis,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma1Config {
    pub channel: Kernel,
    pub layers: usize,
    pub rate: f64,
    pub realization: Realization,
    pub batches: u64,
    pub trials_per_batch: Option<u64>,
    /// Chance that the sender repeats its first symbol at time 2.
    pub repeat_prob: f64,
    pub min_cell: u64,
    pub z_threshold: f64,
    /// Largest fraction of `|z|` above the threshold that still passes.
    pub allowance: f64,
    pub link: LinkCodeConfig,
}

impl Default for Lemma1Config {
    fn default() -> Self {
        Self {
            channel: Kernel::bsc(0.2).expect("valid crossover"),
            layers: 8,
            rate: 0.6,
            realization: Realization::Synthesis,
            batches: 10,
            trials_per_batch: Some(10_000),
            repeat_prob: 0.5,
            min_cell: 100,
            z_threshold: 2.58,
            allowance: 0.05,
            link: LinkCodeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Layer 1 of one batch, conditioned on `(x_{t-1}, y_{t-1}, x_t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Cell {
    pub batch: u64,
    pub x_prev: usize,
    pub y_prev: usize,
    pub x: usize,
    pub samples: u64,
    /// Frequency of each `y_t` within the cell.
    pub lhs: Vec<f64>,
    /// Frequency of each `y_t` given `x_t` alone.
    pub rhs: Vec<f64>,
    /// Cell against the rest of its `x_t` group, per output symbol.
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub realization: Realization,
    pub batches: u64,
    pub trials_per_batch: u64,
    pub cells: Vec<Lemma1Cell>,
    pub z_count: u64,
    pub exceedances: u64,
    pub exceed_fraction: f64,
    pub verdict: Verdict,
}

/// Two-step sender for a single link: every layer sends its first source
/// symbol at time 1; at time 2 one coin, shared by all layers, decides
/// between repeating it and sending the second symbol. The sink outputs what
/// it received.
#[derive(Debug, Clone, Copy)]
pub struct RepeatOrFresh {
    pub layers: usize,
    pub repeat_prob: f64,
}

impl StackedCode for RepeatOrFresh {
    fn name(&self) -> &str {
        "repeat-or-fresh"
    }

    fn layers(&self) -> usize {
        self.layers
    }

    fn encode(&self, view: &StackedEncoderView<'_>, rng: &RngStream) -> Result<Vec<Vec<Signal>>, NetError> {
        let l = view.params.block_len;
        let repeat = rng.child(Label::Index(0)).uniform() < self.repeat_prob;
        let pos = if view.t == 1 || repeat { 0 } else { 1 };
        let lanes: Vec<Signal> = (0..self.layers)
            .map(|layer| Signal::Symbol(view.source.get(layer * l + pos).copied().unwrap_or(0)))
            .collect();
        Ok(vec![lanes; view.out_edges.len()])
    }

    fn decode(&self, view: &StackedDecoderView<'_>, _: &RngStream) -> Result<Vec<usize>, NetError> {
        let l = view.params.block_len;
        let recon = view.base.demands[view.demand].distortion.recon_size();
        let mut out = vec![0; self.layers * l];
        for (t, step) in view.received.iter().enumerate().take(l) {
            if let Some(lanes) = step.first() {
                for (layer, y) in lanes.iter().enumerate() {
                    out[layer * l + t] = y.symbol().filter(|&s| s < recon).unwrap_or(0);
                }
            }
        }
        Ok(out)
    }

    fn check(&self, net: &StackedNetwork, params: &CodeParameters) -> Result<(), NetError> {
        if params.block_len != 2 || params.channel_uses != 2 {
            return Err(NetError::Code("repeat-or-fresh runs with L = n = 2".into()));
        }
        if (0..net.links.len()).any(|e| net.lanes(e) != self.layers) {
            return Err(NetError::Code("repeat-or-fresh needs one lane per layer".into()));
        }
        Ok(())
    }
}

/// Point-to-point network whose source is uniform on the channel inputs.
pub fn point_to_point(channel: &Kernel) -> NetworkSpec {
    let nx = channel.input_size();
    NetworkSpec {
        nodes: 2,
        edges: vec![Edge {
            from: NodeId(0),
            to: NodeId(1),
            channel: ChannelSpec::Dmc(channel.clone()),
        }],
        sources: SourceModel::single(2, NodeId(0), ProbVector::uniform(nx)),
        demands: vec![Demand {
            source: NodeId(0),
            sink: NodeId(1),
            distortion: DistortionMeasure::new(
                (0..nx)
                    .map(|u| (0..channel.output_size()).map(|v| f64::from(u8::from(u != v))).collect())
                    .collect(),
            )
            .expect("0/1 distortion is valid"),
        }],
    }
}

fn realize(cfg: &Lemma1Config) -> Result<StackedNetwork, ExpError> {
    let base = point_to_point(&cfg.channel);
    let stacked = stack_network(&base, cfg.layers)?;
    let reuse = match cfg.realization {
        Realization::Dmc => return Ok(stacked),
        Realization::Synthesis => false,
        Realization::ReusedSynthesis => true,
    };
    let schedule = SynthesisSchedule::Fresh {
        input: ProbVector::uniform(cfg.channel.input_size()),
        channel: cfg.channel.clone(),
        layers: cfg.layers,
        rate: cfg.rate,
        config: cfg.link,
        reuse,
        audit: None,
    };
    let pipe_rate = index_bits(cfg.layers, cfg.rate) as f64 / cfg.layers as f64;
    Ok(emulate_dmc_over_pipe(stacked, 0, schedule, pipe_rate)?)
}

pub fn verify_lemma1(cfg: &Lemma1Config, trials: u64, rng: &RngStream) -> Result<Lemma1Report, ExpError> {
    let trials = cfg.trials_per_batch.unwrap_or(trials);
    let net = realize(cfg)?;
    let code = RepeatOrFresh {
        layers: cfg.layers,
        repeat_prob: cfg.repeat_prob,
    };
    let params = CodeParameters::new(2, 2);
    let (nx, ny) = (cfg.channel.input_size(), cfg.channel.output_size());
    let mut cells = Vec::new();
    for b in 0..cfg.batches {
        let batch = rng.child(Label::Batch(b));
        let tuples = parallel_map(trials, |i| {
            let tr = run_stacked(&net, &code, &params, &batch.trial(i))?;
            let lane = &tr.edges[0][0];
            let sym = |s: &Signal| s.symbol().ok_or(NetError::BadSignal { edge: 0, time: 0 });
            Ok::<_, ExpError>([
                sym(&lane.inputs[0])?,
                sym(&lane.outputs[0])?,
                sym(&lane.inputs[1])?,
                sym(&lane.outputs[1])?,
            ])
        })?;
        // counts[x_prev][y_prev][x][y]
        let mut counts = vec![0u64; nx * ny * nx * ny];
        for [a, c, x, y] in tuples {
            counts[((a * ny + c) * nx + x) * ny + y] += 1;
        }
        let cell_counts = |a: usize, c: usize, x: usize| -> Vec<u64> {
            (0..ny).map(|y| counts[((a * ny + c) * nx + x) * ny + y]).collect()
        };
        for x in 0..nx {
            let mut group = vec![0u64; ny];
            for a in 0..nx {
                for c in 0..ny {
                    for (g, v) in group.iter_mut().zip(cell_counts(a, c, x)) {
                        *g += v;
                    }
                }
            }
            let group_total: u64 = group.iter().sum();
            for a in 0..nx {
                for c in 0..ny {
                    let here = cell_counts(a, c, x);
                    let n: u64 = here.iter().sum();
                    if n < cfg.min_cell {
                        continue;
                    }
                    let rest = group_total - n;
                    cells.push(Lemma1Cell {
                        batch: b,
                        x_prev: a,
                        y_prev: c,
                        x,
                        samples: n,
                        lhs: here.iter().map(|&h| h as f64 / n as f64).collect(),
                        rhs: group.iter().map(|&g| g as f64 / group_total as f64).collect(),
                        z: (0..ny)
                            .map(|y| two_proportion_z(here[y], n, group[y] - here[y], rest))
                            .collect(),
                    });
                }
            }
        }
    }
    let z_count = cells.iter().map(|c| c.z.len() as u64).sum::<u64>();
    let exceedances = cells
        .iter()
        .flat_map(|c| &c.z)
        .filter(|z| z.abs() > cfg.z_threshold)
        .count() as u64;
    let exceed_fraction = if z_count == 0 { 0.0 } else { exceedances as f64 / z_count as f64 };
    let verdict = if z_count == 0 {
        Verdict::Inconclusive
    } else if exceed_fraction <= cfg.allowance {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Lemma1Report {
        realization: cfg.realization,
        batches: cfg.batches,
        trials_per_batch: trials,
        cells,
        z_count,
        exceedances,
        exceed_fraction,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(realization: Realization, channel: Kernel) -> Lemma1Config {
        Lemma1Config {
            channel,
            realization,
            batches: 2,
            trials_per_batch: Some(2000),
            ..Lemma1Config::default()
        }
    }

    #[test]
    fn identity_channel_gives_point_masses() {
        let r = verify_lemma1(&small(Realization::Dmc, Kernel::identity(2)), 0, &RngStream::new(4)).unwrap();
        assert!(!r.cells.is_empty());
        for c in &r.cells {
            assert_eq!(c.lhs, c.rhs);
            assert_eq!(c.lhs[c.x], 1.0);
            assert!(c.z.iter().all(|&z| z == 0.0));
        }
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn conditionals_normalize() {
        let r = verify_lemma1(&small(Realization::Synthesis, Kernel::bsc(0.2).unwrap()), 0, &RngStream::new(5)).unwrap();
        // cells with y_prev != x_prev != x are rarer than the minimum here
        assert_eq!(r.cells.len(), 12);
        assert!(r.cells.iter().all(|c| c.samples >= 100));
        for c in &r.cells {
            assert!((c.lhs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((c.rhs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(c.z.iter().all(|z| z.is_finite()));
        }
    }

    #[test]
    fn empty_run_is_inconclusive() {
        let mut cfg = small(Realization::Dmc, Kernel::bsc(0.2).unwrap());
        cfg.trials_per_batch = Some(10);
        let r = verify_lemma1(&cfg, 0, &RngStream::new(5)).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }
}
