use std::sync::Arc;

use crate::netmodel::{CodeParameters, NetError, Signal};
use crate::probkit::{Label, RngStream};

use super::{StackedCode, StackedDecoderView, StackedEncoderView, StackedNetwork};

/// Codes odd-numbered layers (1, 3, 5, ...) and even-numbered layers
/// (2, 4, 6, ...) as two separate `N/2`-layer stacked codes.
///
/// With a source that has memory, layer `ℓ` carries the `ℓ`-th length-`L`
/// block of one long realization, so blocks within a class are separated by
/// a block of the other class and become nearly independent once `L` is
/// large compared to the source's memory.
pub struct EvenOddCode {
    class: Arc<dyn StackedCode>,
    layers: usize,
}

/// `class` must have `layers / 2` layers; each parity class runs its own
/// instance with its own randomness.
pub fn even_odd_split(class: Arc<dyn StackedCode>, layers: usize) -> Result<EvenOddCode, NetError> {
    if layers == 0 || layers % 2 == 1 {
        return Err(NetError::Code(format!("even/odd split needs an even layer count, got {layers}")));
    }
    if class.layers() != layers / 2 {
        return Err(NetError::LayerMismatch {
            expected: layers / 2,
            got: class.layers(),
        });
    }
    Ok(EvenOddCode { class, layers })
}

impl EvenOddCode {
    /// Zero-based lanes of class `c` (0: odd-numbered layers, 1: even).
    fn lanes(&self, c: usize) -> Vec<usize> {
        (c..self.layers).step_by(2).collect()
    }

    fn gather(&self, source: &[usize], l_len: usize, lanes: &[usize]) -> Vec<usize> {
        lanes
            .iter()
            .flat_map(|&l| source[l * l_len..(l + 1) * l_len].iter().copied())
            .collect()
    }

    fn history(received: &[Vec<Vec<Signal>>], lanes: &[usize]) -> Vec<Vec<Vec<Signal>>> {
        received
            .iter()
            .map(|step| {
                step.iter()
                    .map(|all| lanes.iter().map(|&l| all[l].clone()).collect())
                    .collect()
            })
            .collect()
    }
}

impl StackedCode for EvenOddCode {
    fn name(&self) -> &str {
        self.class.name()
    }

    fn layers(&self) -> usize {
        self.layers
    }

    fn encode(
        &self,
        view: &StackedEncoderView<'_>,
        rng: &RngStream,
    ) -> Result<Vec<Vec<Signal>>, NetError> {
        let mut out = vec![vec![Signal::Symbol(0); self.layers]; view.out_edges.len()];
        for c in 0..2 {
            let lanes = self.lanes(c);
            let source = self.gather(view.source, view.params.block_len, &lanes);
            let received = Self::history(view.received, &lanes);
            let sub = StackedEncoderView {
                layers: self.layers / 2,
                source: &source,
                received: &received,
                ..*view
            };
            let xs = self.class.encode(&sub, &rng.child(Label::Index(c as u64)))?;
            for (slot, class_lanes) in out.iter_mut().zip(xs) {
                for (&l, x) in lanes.iter().zip(class_lanes) {
                    slot[l] = x;
                }
            }
        }
        Ok(out)
    }

    fn decode(&self, view: &StackedDecoderView<'_>, rng: &RngStream) -> Result<Vec<usize>, NetError> {
        let l_len = view.params.block_len;
        let mut out = vec![0; self.layers * l_len];
        for c in 0..2 {
            let lanes = self.lanes(c);
            let source = self.gather(view.source, l_len, &lanes);
            let received = Self::history(view.received, &lanes);
            let sub = StackedDecoderView {
                layers: self.layers / 2,
                source: &source,
                received: &received,
                ..*view
            };
            let recon = self.class.decode(&sub, &rng.child(Label::Index(c as u64)))?;
            for (&l, chunk) in lanes.iter().zip(recon.chunks(l_len)) {
                out[l * l_len..(l + 1) * l_len].copy_from_slice(chunk);
            }
        }
        Ok(out)
    }

    fn check(&self, net: &StackedNetwork, params: &CodeParameters) -> Result<(), NetError> {
        if let Some(e) = (0..net.links.len()).find(|&e| net.lanes(e) != self.layers) {
            return Err(NetError::Code(format!("even/odd split needs one lane per layer on edge {e}")));
        }
        let half = StackedNetwork {
            base: net.base.clone(),
            layers: self.layers / 2,
            links: net.links.clone(),
        };
        self.class.check(&half, params)
    }
}
