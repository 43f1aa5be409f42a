use serde::Serialize;

use crate::probkit::{Label, RngStream, Role};

use super::{
    ChannelSpec, CodeParameters, CodingPolicy, DecoderView, EncoderView, NetError, NetworkSpec,
    NodeId, Signal,
};

/// When bits written to a pipe at time `t` become visible downstream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipeTiming {
    /// Same step, like a DMC output.
    #[default]
    SameStep,
    /// One step later; bits written at the last step are never delivered.
    Delayed,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub pipe_timing: PipeTiming,
    /// Replace the output of `(edge, time)` with a different value after the
    /// channel acts. Used to probe causality.
    pub perturb: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EdgeTrace {
    pub inputs: Vec<Signal>,
    pub outputs: Vec<Signal>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandTrace {
    pub source: NodeId,
    pub sink: NodeId,
    pub block: Vec<usize>,
    pub reconstruction: Vec<usize>,
    pub distortion: f64,
}

/// Everything that happened in one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub edges: Vec<EdgeTrace>,
    pub demands: Vec<DemandTrace>,
}

impl TraceRecord {
    /// `t,x,y` rows for one edge.
    pub fn edge_csv(&self, edge: usize) -> String {
        let trace = &self.edges[edge];
        let mut out = String::from("t,x,y\n");
        for (t, (x, y)) in trace.inputs.iter().zip(&trace.outputs).enumerate() {
            out.push_str(&format!("{},{},{}\n", t + 1, x, y));
        }
        out
    }

    pub fn distortions(&self) -> Vec<f64> {
        self.demands.iter().map(|d| d.distortion).collect()
    }
}

/// Bits a pipe of rate `rate` may have carried by the end of time `t`.
pub fn pipe_budget(rate: f64, t: usize) -> usize {
    (t as f64 * rate + 1e-9).floor() as usize
}

/// Stream for the noise of `edge` at `(layer, time)` within a trial.
pub fn noise_stream(trial: &RngStream, edge: usize, layer: usize, time: usize) -> RngStream {
    trial
        .child(Role::Noise)
        .child(Label::Edge(edge))
        .child(Label::Layer(layer))
        .child(Label::Time(time))
}

pub fn encoder_stream(trial: &RngStream, node: NodeId) -> RngStream {
    trial.child(Role::Encoder).child(Label::Node(node.0))
}

pub fn decoder_stream(trial: &RngStream, demand: usize) -> RngStream {
    trial.child(Role::Decoder).child(Label::Demand(demand))
}

pub fn source_stream(trial: &RngStream) -> RngStream {
    trial.child(Role::Source)
}

struct Topology {
    pub in_edges: Vec<Vec<usize>>,
    pub out_edges: Vec<Vec<usize>>,
}

impl Topology {
    pub fn new(net: &NetworkSpec) -> Self {
        let in_edges: Vec<Vec<usize>> = net.node_ids().map(|v| net.in_edges(v)).collect();
        let out_edges = net.node_ids().map(|v| net.out_edges(v)).collect();
        Self {
            in_edges,
            out_edges,
        }
    }
}

pub fn run_block(
    net: &NetworkSpec,
    code: &dyn CodingPolicy,
    params: &CodeParameters,
    trial: &RngStream,
) -> Result<TraceRecord, NetError> {
    run_block_with(net, code, params, trial, &RunOptions::default())
}

/// Runs one block of `n` channel uses.
///
/// Sources are drawn from `trial / Source`; node `a` encodes with
/// `trial / Encoder / Node(a)`; demand `d` decodes with
/// `trial / Decoder / Demand(d)`; each DMC use consumes one uniform from
/// its [`noise_stream`].
pub fn run_block_with(
    net: &NetworkSpec,
    code: &dyn CodingPolicy,
    params: &CodeParameters,
    trial: &RngStream,
    options: &RunOptions,
) -> Result<TraceRecord, NetError> {
    if params.block_len == 0 || params.channel_uses == 0 {
        return Err(NetError::InvalidParams(*params));
    }
    code.check(net, params)?;
    let topo = Topology::new(net);
    let sources = net.sources.sample_block(params.block_len, &source_stream(trial));
    let keying = code.time_keying();
    let m = net.nodes;
    let n = params.channel_uses;

    let mut received: Vec<Vec<Vec<Signal>>> = vec![Vec::with_capacity(n); m];
    let mut edges = vec![EdgeTrace::default(); net.edges.len()];
    let mut sent_bits = vec![0usize; net.edges.len()];
    let mut in_flight: Vec<Vec<bool>> = vec![Vec::new(); net.edges.len()];
    let enc_streams: Vec<RngStream> = net.node_ids().map(|v| encoder_stream(trial, v)).collect();

    for t in 1..=n {
        let mut inputs: Vec<Option<Signal>> = vec![None; net.edges.len()];
        for a in 0..m {
            let view = EncoderView {
                net,
                params,
                node: NodeId(a),
                t,
                source: &sources[a],
                received: &received[a],
                in_edges: &topo.in_edges[a],
                out_edges: &topo.out_edges[a],
            };
            let out = code.encode(&view, &enc_streams[a])?;
            if out.len() != topo.out_edges[a].len() {
                return Err(NetError::Arity {
                    node: NodeId(a),
                    expected: topo.out_edges[a].len(),
                    got: out.len(),
                });
            }
            for (&e, x) in topo.out_edges[a].iter().zip(out) {
                inputs[e] = Some(x);
            }
        }

        let mut outputs = Vec::with_capacity(net.edges.len());
        for (e, edge) in net.edges.iter().enumerate() {
            let x = inputs[e].take().expect("every edge has a tail");
            let mut y = match (&edge.channel, &x) {
                (ChannelSpec::Dmc(k), Signal::Symbol(sym)) if *sym < k.input_size() => {
                    let (layer, time) = keying.key(t);
                    let u = noise_stream(trial, e, layer, time).uniform();
                    Signal::Symbol(k.sample_output(*sym, u))
                }
                (ChannelSpec::BitPipe { rate }, Signal::Bits(bits)) => {
                    sent_bits[e] += bits.len();
                    let budget = pipe_budget(*rate, t);
                    if sent_bits[e] > budget {
                        return Err(NetError::PipeOverflow {
                            edge: e,
                            time: t,
                            sent: sent_bits[e],
                            budget,
                        });
                    }
                    match options.pipe_timing {
                        PipeTiming::SameStep => x.clone(),
                        PipeTiming::Delayed => {
                            Signal::Bits(std::mem::replace(&mut in_flight[e], bits.clone()))
                        }
                    }
                }
                _ => return Err(NetError::BadSignal { edge: e, time: t }),
            };
            if options.perturb == Some((e, t)) {
                y = perturbed(&edge.channel, y);
            }
            edges[e].inputs.push(x);
            edges[e].outputs.push(y.clone());
            outputs.push(y);
        }
        for (v, slot) in received.iter_mut().enumerate() {
            slot.push(topo.in_edges[v].iter().map(|&e| outputs[e].clone()).collect());
        }
    }

    let mut demands = Vec::with_capacity(net.demands.len());
    for (d, demand) in net.demands.iter().enumerate() {
        let b = demand.sink.0;
        let view = DecoderView {
            net,
            params,
            demand: d,
            node: demand.sink,
            source: &sources[b],
            received: &received[b],
            in_edges: &topo.in_edges[b],
        };
        let recon = code.decode(&view, &decoder_stream(trial, d))?;
        if recon.len() != params.block_len {
            return Err(NetError::ReconstructionLength {
                demand: d,
                expected: params.block_len,
                got: recon.len(),
            });
        }
        let limit = demand.distortion.recon_size();
        if let Some(&bad) = recon.iter().find(|&&v| v >= limit) {
            return Err(NetError::ReconstructionSymbol { demand: d, symbol: bad });
        }
        let block = sources[demand.source.0].clone();
        let distortion = demand.distortion.block(&block, &recon);
        demands.push(DemandTrace {
            source: demand.source,
            sink: demand.sink,
            block,
            reconstruction: recon,
            distortion,
        });
    }
    Ok(TraceRecord { edges, demands })
}

fn perturbed(channel: &ChannelSpec, y: Signal) -> Signal {
    match (channel, y) {
        (ChannelSpec::Dmc(k), Signal::Symbol(s)) => Signal::Symbol((s + 1) % k.output_size()),
        (_, Signal::Bits(mut bits)) => {
            match bits.first_mut() {
                Some(b) => *b = !*b,
                None => bits.push(true),
            }
            Signal::Bits(bits)
        }
        (_, y) => y,
    }
}
