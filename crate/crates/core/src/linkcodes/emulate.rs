use std::sync::Arc;

use serde::Serialize;

use crate::netmodel::{ChannelSpec, NetError};
use crate::probkit::{Kernel, Label, ProbVector, RngStream, Role, StreamAudit};
use crate::stacking::{LaneTransport, StackedLink, StackedNetwork};

use super::packed::{pack_index, unpack_index};
use super::{build_synthesis_code, ChannelCode, LinkCodeConfig, LinkError, SynthesisCode};

/// Error statistics of the channel-coded links of a network and the
/// resulting bound `|E| · P_e,max · d_max` on the distortion increase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkCodeReport {
    pub p_e: Vec<f64>,
    pub p_e_max: f64,
    pub edge_count: usize,
    pub d_max: f64,
    pub excess_bound: f64,
}

impl LinkCodeReport {
    pub fn new(p_e: Vec<f64>, edge_count: usize, d_max: f64) -> Self {
        let p_e_max = p_e.iter().copied().fold(0.0, f64::max);
        Self {
            excess_bound: edge_count as f64 * p_e_max * d_max,
            p_e,
            p_e_max,
            edge_count,
            d_max,
        }
    }

    pub fn recomputed_bound(&self) -> f64 {
        self.edge_count as f64 * self.p_e_max * self.d_max
    }
}

/// `d_max · E‖p̂ - p‖₁`: how far distortion can move when a link's
/// empirical joint type is off by `mean_l1` on average.
pub fn continuity_bound(d_max: f64, mean_l1: f64) -> f64 {
    d_max * mean_l1
}

fn base_kernel(net: &StackedNetwork, edge: usize) -> Result<&Kernel, LinkError> {
    match net.base.edges.get(edge).map(|e| &e.channel) {
        Some(ChannelSpec::Dmc(k)) => Ok(k),
        _ => Err(LinkError::NotDmc(edge)),
    }
}

/// Replaces the `N` copies of DMC `edge` by a bundled pipe of `⌊NR⌋` bits per
/// stacked use, carried by `code` over those copies.
pub fn emulate_pipe_over_dmc(
    net: StackedNetwork,
    edge: usize,
    code: Arc<ChannelCode>,
) -> Result<StackedNetwork, LinkError> {
    if code.layers() != net.layers {
        return Err(NetError::LayerMismatch {
            expected: net.layers,
            got: code.layers(),
        }
        .into());
    }
    if base_kernel(&net, edge)? != code.channel() {
        return Err(LinkError::ChannelMismatch(edge));
    }
    let bits = code.message_bits();
    Ok(net.with_link(
        edge,
        StackedLink::Bundle {
            bits,
            transport: Some(code),
        },
    ))
}

/// Replaces `edge` by a noiseless bundled pipe of `bits` bits per stacked use.
pub fn ideal_pipe(net: StackedNetwork, edge: usize, bits: usize) -> StackedNetwork {
    net.with_link(edge, StackedLink::Bundle { bits, transport: None })
}

/// Which synthesis code serves which stacked time.
#[derive(Clone)]
pub enum SynthesisSchedule {
    /// One code for every time; selection randomness is fresh per time.
    Shared(Arc<SynthesisCode>),
    /// Code `t - 1` at stacked time `t`.
    PerTime(Vec<Arc<SynthesisCode>>),
    /// A new codebook per trial and time, drawn from the link stream. With
    /// `reuse`, every time reuses the time-1 codebook and selection draw.
    Fresh {
        input: ProbVector,
        channel: Kernel,
        layers: usize,
        rate: f64,
        config: LinkCodeConfig,
        reuse: bool,
        audit: Option<Arc<StreamAudit>>,
    },
}

impl SynthesisSchedule {
    fn check_shape(&self, kernel: &Kernel, layers: usize) -> Result<usize, LinkError> {
        let codes: Vec<(&Kernel, usize, usize)> = match self {
            SynthesisSchedule::Shared(c) => vec![(c.channel(), c.layers(), c.index_bits())],
            SynthesisSchedule::PerTime(cs) => {
                cs.iter().map(|c| (c.channel(), c.layers(), c.index_bits())).collect()
            }
            SynthesisSchedule::Fresh {
                channel, layers, rate, ..
            } => vec![(channel, *layers, super::index_bits(*layers, *rate))],
        };
        let mut bits = 0;
        for (k, l, b) in codes {
            if l != layers {
                return Err(NetError::LayerMismatch { expected: layers, got: l }.into());
            }
            if k != kernel {
                return Err(LinkError::ChannelMismatch(0));
            }
            bits = bits.max(b);
        }
        Ok(bits)
    }
}

/// Produces a DMC link's layer outputs by channel synthesis: the encoder
/// chooses a codeword index, the index crosses the pipe as big-endian bits,
/// and the codeword becomes the outputs.
pub struct SynthesisTransport {
    schedule: SynthesisSchedule,
}

impl SynthesisTransport {
    pub fn new(schedule: SynthesisSchedule) -> Self {
        Self { schedule }
    }
}

impl LaneTransport for SynthesisTransport {
    fn transmit(&self, inputs: &[usize], t: usize, stream: &RngStream) -> Result<Vec<usize>, NetError> {
        let fresh;
        let (code, selection): (&SynthesisCode, RngStream) = match &self.schedule {
            SynthesisSchedule::Shared(c) => (c, stream.child(Role::Selection).child(Label::Time(t))),
            SynthesisSchedule::PerTime(cs) => {
                let c = cs.get(t - 1).ok_or_else(|| {
                    NetError::Code(format!("no synthesis code for stacked time {t}"))
                })?;
                (c, stream.child(Role::Selection).child(Label::Time(t)))
            }
            SynthesisSchedule::Fresh {
                input,
                channel,
                layers,
                rate,
                config,
                reuse,
                audit,
            } => {
                let key = if *reuse { 1 } else { t };
                let book = stream.child(Role::Codebook).child(Label::Time(key));
                let selection = stream.child(Role::Selection).child(Label::Time(key));
                if let Some(audit) = audit {
                    audit.claim(&book)?;
                    audit.claim(&selection)?;
                }
                fresh = build_synthesis_code(input, channel, *layers, *rate, &book, config)
                    .map_err(|e| NetError::Code(e.to_string()))?;
                (&fresh, selection)
            }
        };
        let index = code.select(inputs, selection.uniform())?;
        let wire = pack_index(index as u64, code.index_bits());
        Ok(code.codeword(unpack_index(&wire) as usize).to_vec())
    }
}

/// Replaces the `N` copies of DMC `edge` by synthesis over a bit-pipe of
/// `pipe_rate` bits per layer per use. The pipe must carry each index:
/// `⌊N · pipe_rate⌋ ≥ ⌈NR⌉`.
pub fn emulate_dmc_over_pipe(
    net: StackedNetwork,
    edge: usize,
    schedule: SynthesisSchedule,
    pipe_rate: f64,
) -> Result<StackedNetwork, LinkError> {
    let kernel = base_kernel(&net, edge)?.clone();
    let needed = schedule.check_shape(&kernel, net.layers).map_err(|e| match e {
        LinkError::ChannelMismatch(_) => LinkError::ChannelMismatch(edge),
        other => other,
    })?;
    let available = (net.layers as f64 * pipe_rate + 1e-9).floor() as usize;
    if available < needed {
        return Err(LinkError::PipeTooNarrow { needed, available });
    }
    Ok(net.with_link(
        edge,
        StackedLink::Emulated(Arc::new(SynthesisTransport::new(schedule))),
    ))
}
