use std::sync::Arc;

use crate::netmodel::{
    CodeParameters, CodingPolicy, DecoderView, EncoderView, NetError, Signal,
};
use crate::probkit::{Label, RngStream};

use super::{StackedCode, StackedDecoderView, StackedEncoderView, StackedNetwork};

/// A single-layer code run independently in every layer.
///
/// Layer `ℓ` sees only lane `ℓ` of each link and source symbols
/// `(ℓ-1)L..ℓL`, and draws its randomness from the node stream's
/// `Layer(ℓ)` child. A one-layer lift is the code itself, streams included.
pub struct LiftedCode {
    inner: Arc<dyn CodingPolicy>,
    layers: usize,
}

pub fn lift_code(code: Arc<dyn CodingPolicy>, layers: usize) -> Result<LiftedCode, NetError> {
    if layers == 0 {
        return Err(NetError::InvalidLayerCount(layers));
    }
    Ok(LiftedCode { inner: code, layers })
}

impl LiftedCode {
    fn layer_stream(&self, rng: &RngStream, layer: usize) -> RngStream {
        if self.layers == 1 {
            *rng
        } else {
            rng.child(Label::Layer(layer + 1))
        }
    }
}

/// Lane `lane` of a stacked observation history.
pub(crate) fn lane_history(received: &[Vec<Vec<Signal>>], lane: usize) -> Vec<Vec<Signal>> {
    received
        .iter()
        .map(|step| step.iter().map(|lanes| lanes[lane].clone()).collect())
        .collect()
}

impl StackedCode for LiftedCode {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn layers(&self) -> usize {
        self.layers
    }

    fn encode(
        &self,
        view: &StackedEncoderView<'_>,
        rng: &RngStream,
    ) -> Result<Vec<Vec<Signal>>, NetError> {
        let l_len = view.params.block_len;
        let mut out = vec![Vec::with_capacity(self.layers); view.out_edges.len()];
        for layer in 0..self.layers {
            let received = lane_history(view.received, layer);
            let sub = EncoderView {
                net: view.base,
                params: view.params,
                node: view.node,
                t: view.t,
                source: &view.source[layer * l_len..(layer + 1) * l_len],
                received: &received,
                in_edges: view.in_edges,
                out_edges: view.out_edges,
            };
            let xs = self.inner.encode(&sub, &self.layer_stream(rng, layer))?;
            if xs.len() != out.len() {
                return Err(NetError::Arity {
                    node: view.node,
                    expected: out.len(),
                    got: xs.len(),
                });
            }
            for (lanes, x) in out.iter_mut().zip(xs) {
                lanes.push(x);
            }
        }
        Ok(out)
    }

    fn decode(&self, view: &StackedDecoderView<'_>, rng: &RngStream) -> Result<Vec<usize>, NetError> {
        let l_len = view.params.block_len;
        let mut out = Vec::with_capacity(self.layers * l_len);
        for layer in 0..self.layers {
            let received = lane_history(view.received, layer);
            let sub = DecoderView {
                net: view.base,
                params: view.params,
                demand: view.demand,
                node: view.node,
                source: &view.source[layer * l_len..(layer + 1) * l_len],
                received: &received,
                in_edges: view.in_edges,
            };
            out.extend(self.inner.decode(&sub, &self.layer_stream(rng, layer))?);
        }
        Ok(out)
    }

    fn check(&self, net: &StackedNetwork, params: &CodeParameters) -> Result<(), NetError> {
        if let Some(e) = (0..net.links.len()).find(|&e| net.lanes(e) != self.layers) {
            return Err(NetError::Code(format!("lifted code needs one lane per layer on edge {e}")));
        }
        self.inner.check(&net.base, params)
    }

    fn base_code(&self) -> Option<Arc<dyn CodingPolicy>> {
        Some(self.inner.clone())
    }
}
