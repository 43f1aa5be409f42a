use std::sync::Arc;

use serde::Serialize;

use crate::netmodel::{
    decoder_stream, encoder_stream, noise_stream, pipe_budget, source_stream, ChannelSpec,
    CodeParameters, CodingPolicy, EdgeTrace, NetError, NetworkSpec, NodeId, Signal,
};
use crate::probkit::{Label, RngStream, Role};

use super::{StackedLink, StackedNetwork};

/// What all `N` copies of a node see before stacked time `t`.
pub struct StackedEncoderView<'a> {
    pub base: &'a NetworkSpec,
    pub layers: usize,
    /// Per-layer `L` and `n`.
    pub params: &'a CodeParameters,
    pub node: NodeId,
    pub t: usize,
    /// The length-`NL` source block; layer `ℓ` owns symbols `(ℓ-1)L..ℓL`.
    pub source: &'a [usize],
    /// `received[s][i][lane]`: output at stacked time `s + 1` on the `i`-th
    /// in-edge. Only times before `t` are present.
    pub received: &'a [Vec<Vec<Signal>>],
    pub in_edges: &'a [usize],
    pub out_edges: &'a [usize],
}

pub struct StackedDecoderView<'a> {
    pub base: &'a NetworkSpec,
    pub layers: usize,
    pub params: &'a CodeParameters,
    pub demand: usize,
    pub node: NodeId,
    pub source: &'a [usize],
    pub received: &'a [Vec<Vec<Signal>>],
    pub in_edges: &'a [usize],
}

/// A block code for an `N`-layer stacked network. Copies of a node may pool
/// everything they have observed, but only from earlier stacked times.
pub trait StackedCode: Send + Sync {
    fn name(&self) -> &str;

    fn layers(&self) -> usize;

    /// `[out-edge][lane]` inputs for stacked time `view.t`.
    fn encode(&self, view: &StackedEncoderView<'_>, rng: &RngStream)
        -> Result<Vec<Vec<Signal>>, NetError>;

    /// Reconstruction of length `NL`.
    fn decode(&self, view: &StackedDecoderView<'_>, rng: &RngStream) -> Result<Vec<usize>, NetError>;

    fn check(&self, _net: &StackedNetwork, _params: &CodeParameters) -> Result<(), NetError> {
        Ok(())
    }

    /// The single-layer code this was lifted from, if any.
    fn base_code(&self) -> Option<Arc<dyn CodingPolicy>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackedDemandTrace {
    pub source: NodeId,
    pub sink: NodeId,
    pub block: Vec<usize>,
    pub reconstruction: Vec<usize>,
    pub distortion: f64,
    /// Distortion of each length-`L` layer sub-block.
    pub layer_distortions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackedTrace {
    /// `edges[e][lane]`.
    pub edges: Vec<Vec<EdgeTrace>>,
    pub demands: Vec<StackedDemandTrace>,
}

impl StackedTrace {
    pub fn distortions(&self) -> Vec<f64> {
        self.demands.iter().map(|d| d.distortion).collect()
    }
}

/// Stream handed to the transport of `edge`.
pub fn link_stream(trial: &RngStream, edge: usize) -> RngStream {
    trial.child(Role::Link).child(Label::Edge(edge))
}

/// Runs one stacked block with the same stream layout as
/// [`crate::netmodel::run_block`]; copy `ℓ` of a DMC edge at stacked time
/// `t` draws its noise from `noise_stream(trial, e, ℓ, t)`.
pub fn run_stacked(
    net: &StackedNetwork,
    code: &dyn StackedCode,
    params: &CodeParameters,
    trial: &RngStream,
) -> Result<StackedTrace, NetError> {
    if code.layers() != net.layers {
        return Err(NetError::LayerMismatch {
            expected: net.layers,
            got: code.layers(),
        });
    }
    if params.block_len == 0 || params.channel_uses == 0 {
        return Err(NetError::InvalidParams(*params));
    }
    code.check(net, params)?;
    let base = &net.base;
    let layers = net.layers;
    let block = layers * params.block_len;
    let sources = base.sources.sample_block(block, &source_stream(trial));
    let in_edges: Vec<Vec<usize>> = base.node_ids().map(|v| base.in_edges(v)).collect();
    let out_edges: Vec<Vec<usize>> = base.node_ids().map(|v| base.out_edges(v)).collect();
    let enc_streams: Vec<RngStream> = base.node_ids().map(|v| encoder_stream(trial, v)).collect();
    let link_streams: Vec<RngStream> = (0..base.edges.len()).map(|e| link_stream(trial, e)).collect();

    let mut received: Vec<Vec<Vec<Vec<Signal>>>> = vec![Vec::new(); base.nodes];
    let mut edges: Vec<Vec<EdgeTrace>> = (0..base.edges.len())
        .map(|e| vec![EdgeTrace::default(); net.lanes(e)])
        .collect();
    let mut sent_bits: Vec<Vec<usize>> = (0..base.edges.len()).map(|e| vec![0; net.lanes(e)]).collect();

    for t in 1..=params.channel_uses {
        let mut inputs: Vec<Option<Vec<Signal>>> = vec![None; base.edges.len()];
        for a in base.node_ids() {
            let view = StackedEncoderView {
                base,
                layers,
                params,
                node: a,
                t,
                source: &sources[a.0],
                received: &received[a.0],
                in_edges: &in_edges[a.0],
                out_edges: &out_edges[a.0],
            };
            let out = code.encode(&view, &enc_streams[a.0])?;
            if out.len() != out_edges[a.0].len() {
                return Err(NetError::Arity {
                    node: a,
                    expected: out_edges[a.0].len(),
                    got: out.len(),
                });
            }
            for (&e, lanes) in out_edges[a.0].iter().zip(out) {
                if lanes.len() != net.lanes(e) {
                    return Err(NetError::LayerMismatch {
                        expected: net.lanes(e),
                        got: lanes.len(),
                    });
                }
                inputs[e] = Some(lanes);
            }
        }

        let mut outputs: Vec<Vec<Signal>> = Vec::with_capacity(base.edges.len());
        for (e, edge) in base.edges.iter().enumerate() {
            let xs = inputs[e].take().expect("every edge has a tail");
            let bad = || NetError::BadSignal { edge: e, time: t };
            let ys: Vec<Signal> = match (&net.links[e], &edge.channel) {
                (StackedLink::Copies, ChannelSpec::Dmc(k)) => xs
                    .iter()
                    .enumerate()
                    .map(|(l, x)| match x {
                        Signal::Symbol(s) if *s < k.input_size() => {
                            let u = noise_stream(trial, e, l + 1, t).uniform();
                            Ok(Signal::Symbol(k.sample_output(*s, u)))
                        }
                        _ => Err(bad()),
                    })
                    .collect::<Result<_, _>>()?,
                (StackedLink::Copies, ChannelSpec::BitPipe { rate }) => {
                    for (l, x) in xs.iter().enumerate() {
                        let bits = x.bits().ok_or_else(bad)?;
                        charge(&mut sent_bits[e][l], bits.len(), pipe_budget(*rate, t), e, t)?;
                    }
                    xs.clone()
                }
                (StackedLink::Bundle { bits: per_use, transport }, _) => {
                    let bits = xs[0].bits().ok_or_else(bad)?;
                    charge(&mut sent_bits[e][0], bits.len(), t * per_use, e, t)?;
                    match transport {
                        None => xs.clone(),
                        Some(tr) => vec![Signal::Bits(tr.carry(bits, t, &link_streams[e])?)],
                    }
                }
                (StackedLink::Emulated(tr), channel) => {
                    let limit = match channel {
                        ChannelSpec::Dmc(k) => k.input_size(),
                        ChannelSpec::BitPipe { .. } => usize::MAX,
                    };
                    let symbols: Vec<usize> = xs
                        .iter()
                        .map(|x| x.symbol().filter(|&s| s < limit).ok_or_else(bad))
                        .collect::<Result<_, _>>()?;
                    let ys = tr.transmit(&symbols, t, &link_streams[e])?;
                    if ys.len() != layers {
                        return Err(NetError::LayerMismatch {
                            expected: layers,
                            got: ys.len(),
                        });
                    }
                    ys.into_iter().map(Signal::Symbol).collect()
                }
            };
            for (lane, (x, y)) in edges[e].iter_mut().zip(xs.into_iter().zip(&ys)) {
                lane.inputs.push(x);
                lane.outputs.push(y.clone());
            }
            outputs.push(ys);
        }
        for (v, slot) in received.iter_mut().enumerate() {
            slot.push(in_edges[v].iter().map(|&e| outputs[e].clone()).collect());
        }
    }

    let mut demands = Vec::with_capacity(base.demands.len());
    for (d, demand) in base.demands.iter().enumerate() {
        let b = demand.sink.0;
        let view = StackedDecoderView {
            base,
            layers,
            params,
            demand: d,
            node: demand.sink,
            source: &sources[b],
            received: &received[b],
            in_edges: &in_edges[b],
        };
        let recon = code.decode(&view, &decoder_stream(trial, d))?;
        if recon.len() != block {
            return Err(NetError::ReconstructionLength {
                demand: d,
                expected: block,
                got: recon.len(),
            });
        }
        let limit = demand.distortion.recon_size();
        if let Some(&bad) = recon.iter().find(|&&v| v >= limit) {
            return Err(NetError::ReconstructionSymbol { demand: d, symbol: bad });
        }
        let source_block = sources[demand.source.0].clone();
        let layer_distortions = source_block
            .chunks(params.block_len)
            .zip(recon.chunks(params.block_len))
            .map(|(u, v)| demand.distortion.block(u, v))
            .collect();
        demands.push(StackedDemandTrace {
            source: demand.source,
            sink: demand.sink,
            distortion: demand.distortion.block(&source_block, &recon),
            block: source_block,
            reconstruction: recon,
            layer_distortions,
        });
    }
    Ok(StackedTrace { edges, demands })
}

fn charge(sent: &mut usize, bits: usize, budget: usize, edge: usize, time: usize) -> Result<(), NetError> {
    *sent += bits;
    if *sent > budget {
        return Err(NetError::PipeOverflow {
            edge,
            time,
            sent: *sent,
            budget,
        });
    }
    Ok(())
}
