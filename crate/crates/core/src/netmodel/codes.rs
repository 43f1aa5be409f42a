//! Small reference codes.

use crate::probkit::RngStream;

use super::{
    ChannelSpec, CodeParameters, CodingPolicy, DecoderView, EncoderView, NetError, NetworkSpec,
    Signal,
};

/// Every node sends `source[(t - 1) mod L]` on each out-edge; the sink of a
/// demand reads its first in-edge at times `1..=L`.
///
/// With `n = L` this is symbol-by-symbol forwarding. With `n = 2L` each
/// symbol goes out twice and only the first copy is decoded. Outputs outside
/// the reconstruction alphabet (erasures) decode to 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct UncodedRelay;

impl CodingPolicy for UncodedRelay {
    fn name(&self) -> &str {
        "uncoded"
    }

    fn encode(&self, view: &EncoderView<'_>, _: &RngStream) -> Result<Vec<Signal>, NetError> {
        let u = view.source[(view.t - 1) % view.source.len()];
        Ok(vec![Signal::Symbol(u); view.out_edges.len()])
    }

    fn decode(&self, view: &DecoderView<'_>, _: &RngStream) -> Result<Vec<usize>, NetError> {
        let recon = view.net.demands[view.demand].distortion.recon_size();
        (0..view.params.block_len)
            .map(|k| {
                let y = view.received[k]
                    .first()
                    .and_then(Signal::symbol)
                    .ok_or_else(|| NetError::Code("uncoded relay needs a DMC in-edge".into()))?;
                Ok(if y < recon { y } else { 0 })
            })
            .collect()
    }

    fn check(&self, net: &NetworkSpec, params: &CodeParameters) -> Result<(), NetError> {
        if params.channel_uses < params.block_len {
            return Err(NetError::InvalidParams(*params));
        }
        for (e, edge) in net.edges.iter().enumerate() {
            match &edge.channel {
                ChannelSpec::Dmc(k) if k.input_size() >= net.sources.alphabet(edge.from) => {}
                _ => return Err(NetError::Code(format!("edge {e} cannot carry raw source symbols"))),
            }
        }
        Ok(())
    }
}

/// Ignores the channels and reconstructs every symbol as `value`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantCode {
    pub value: usize,
}

impl CodingPolicy for ConstantCode {
    fn name(&self) -> &str {
        "constant"
    }

    fn encode(&self, view: &EncoderView<'_>, _: &RngStream) -> Result<Vec<Signal>, NetError> {
        Ok(view
            .out_edges
            .iter()
            .map(|&e| match view.net.edges[e].channel {
                ChannelSpec::Dmc(_) => Signal::Symbol(0),
                ChannelSpec::BitPipe { .. } => Signal::empty_bits(),
            })
            .collect())
    }

    fn decode(&self, view: &DecoderView<'_>, _: &RngStream) -> Result<Vec<usize>, NetError> {
        Ok(vec![self.value; view.params.block_len])
    }
}

/// Binary code that uses a feedback link adaptively.
///
/// Each source symbol takes three uses of the forward edge. The sender
/// transmits `u` twice; the receiver echoes its first observation back; on
/// the third use the sender signals whether the echo was wrong, and the
/// decoder then trusts the second observation instead of the first.
/// Needs `n = 3L`, one forward and one backward binary DMC between the
/// first demand's endpoints.
#[derive(Debug, Clone, Copy, Default)]
pub struct FeedbackRepeat;

impl FeedbackRepeat {
    fn endpoints(net: &NetworkSpec) -> Result<(usize, usize, usize, usize), NetError> {
        let d = net
            .demands
            .first()
            .ok_or_else(|| NetError::Code("feedback code needs a demand".into()))?;
        let (a, b) = (d.source, d.sink);
        let find = |from, to| {
            net.edges
                .iter()
                .position(|e| e.from == from && e.to == to)
                .ok_or_else(|| NetError::Code(format!("no edge {from} -> {to}")))
        };
        Ok((a.0, b.0, find(a, b)?, find(b, a)?))
    }
}

impl CodingPolicy for FeedbackRepeat {
    fn name(&self) -> &str {
        "feedback"
    }

    fn encode(&self, view: &EncoderView<'_>, _: &RngStream) -> Result<Vec<Signal>, NetError> {
        let (a, b, fwd, back) = Self::endpoints(view.net)?;
        let k = (view.t - 1) / 3;
        let phase = (view.t - 1) % 3;
        let mut out = vec![Signal::Symbol(0); view.out_edges.len()];
        let lane = |e| view.out_edges.iter().position(|&x| x == e).unwrap();
        let heard = |e, s: usize| {
            let pos = view.in_edges.iter().position(|&x| x == e).unwrap();
            view.received[s][pos].symbol().unwrap_or(0)
        };
        if view.node.0 == a {
            let u = view.source[k];
            let x = match phase {
                0 | 1 => u,
                _ => usize::from(heard(back, 3 * k + 1) != u),
            };
            out[lane(fwd)] = Signal::Symbol(x);
        } else if view.node.0 == b && phase == 1 {
            out[lane(back)] = Signal::Symbol(heard(fwd, 3 * k));
        }
        Ok(out)
    }

    fn decode(&self, view: &DecoderView<'_>, _: &RngStream) -> Result<Vec<usize>, NetError> {
        let (_, _, fwd, _) = Self::endpoints(view.net)?;
        let pos = view.in_edges.iter().position(|&x| x == fwd).unwrap();
        let y = |s: usize| view.received[s][pos].symbol().unwrap_or(0);
        Ok((0..view.params.block_len)
            .map(|k| if y(3 * k + 2) == 1 { y(3 * k + 1) } else { y(3 * k) })
            .collect())
    }

    fn check(&self, net: &NetworkSpec, params: &CodeParameters) -> Result<(), NetError> {
        let (_, _, fwd, back) = Self::endpoints(net)?;
        if params.channel_uses != 3 * params.block_len {
            return Err(NetError::InvalidParams(*params));
        }
        for e in [fwd, back] {
            match &net.edges[e].channel {
                ChannelSpec::Dmc(k) if k.input_size() == 2 && k.output_size() == 2 => {}
                _ => return Err(NetError::Code(format!("edge {e} must be a binary DMC"))),
            }
        }
        Ok(())
    }
}
