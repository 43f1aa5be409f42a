use crate::netmodel::{CodeParameters, NetError, NodeId, Signal};
use crate::probkit::RngStream;
use crate::stacking::{StackedCode, StackedDecoderView, StackedEncoderView, StackedNetwork};

/// Moves the raw bits of a binary source block down a line of bundled links.
///
/// The first node of the first demand sends bits `(t-1)K .. tK` of its
/// `NL`-bit block at stacked time `t`; every other node forwards at `t` what
/// it received at `t - 1`. The sink fills bits that never arrived with 0.
#[derive(Debug, Clone, Copy)]
pub struct BundleRelay {
    pub layers: usize,
    pub bits_per_use: usize,
}

impl BundleRelay {
    fn chunk(&self, source: &[usize], t: usize) -> Vec<bool> {
        let start = ((t - 1) * self.bits_per_use).min(source.len());
        let end = (t * self.bits_per_use).min(source.len());
        source[start..end].iter().map(|&u| u == 1).collect()
    }
}

impl StackedCode for BundleRelay {
    fn name(&self) -> &str {
        "bundle-relay"
    }

    fn layers(&self) -> usize {
        self.layers
    }

    fn encode(
        &self,
        view: &StackedEncoderView<'_>,
        _: &RngStream,
    ) -> Result<Vec<Vec<Signal>>, NetError> {
        let origin = view.base.demands.first().map_or(NodeId(0), |d| d.source);
        let bits = if view.node == origin {
            self.chunk(view.source, view.t)
        } else if view.t >= 2 && !view.in_edges.is_empty() {
            view.received[view.t - 2][0][0].bits().unwrap_or(&[]).to_vec()
        } else {
            Vec::new()
        };
        Ok(view
            .out_edges
            .iter()
            .map(|_| vec![Signal::Bits(bits.clone())])
            .collect())
    }

    fn decode(&self, view: &StackedDecoderView<'_>, _: &RngStream) -> Result<Vec<usize>, NetError> {
        let len = self.layers * view.params.block_len;
        let mut out: Vec<usize> = view
            .received
            .iter()
            .filter_map(|step| step.first().and_then(|lanes| lanes[0].bits()))
            .flatten()
            .map(|&b| usize::from(b))
            .collect();
        out.resize(len, 0);
        Ok(out)
    }

    fn check(&self, net: &StackedNetwork, _: &CodeParameters) -> Result<(), NetError> {
        if net.layers != self.layers {
            return Err(NetError::LayerMismatch {
                expected: net.layers,
                got: self.layers,
            });
        }
        let m = net.base.nodes;
        let line = net.base.edges.len() == m.saturating_sub(1)
            && net
                .base
                .edges
                .iter()
                .enumerate()
                .all(|(i, e)| e.from == NodeId(i) && e.to == NodeId(i + 1));
        if !line || (0..net.links.len()).any(|e| net.lanes(e) != 1) {
            return Err(NetError::Code("bundle relay needs a line of bundled links".into()));
        }
        if net.base.sources.alphabet(NodeId(0)) != 2 {
            return Err(NetError::Code("bundle relay needs a binary source".into()));
        }
        Ok(())
    }
}
