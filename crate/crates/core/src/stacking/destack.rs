use std::sync::Arc;

use crate::netmodel::{
    CodeParameters, CodingPolicy, DecoderView, EncoderView, NetError, NetworkSpec, Signal,
    TimeKeying,
};
use crate::probkit::RngStream;

use super::{stack_network, StackedCode, StackedDecoderView, StackedEncoderView};

/// Single-layer replay of a stacked code.
///
/// Period `t` covers single-layer times `(t-1)N + 1 ..= tN`; at
/// `τ = (t-1)N + ℓ` a node emits what its layer-`ℓ` copy would emit at
/// stacked time `t`. Outputs received during a period are only used from the
/// next period on, which is exactly the information a stacked encoder has.
pub struct DestackedCode {
    inner: Arc<dyn StackedCode>,
    stacked_params: CodeParameters,
}

/// Single-layer code with block length `NL` and `Nn` channel uses.
pub fn destack_code(
    stacked: Arc<dyn StackedCode>,
    params: &CodeParameters,
) -> (Arc<dyn CodingPolicy>, CodeParameters) {
    let n = stacked.layers();
    if n == 1 {
        if let Some(base) = stacked.base_code() {
            return (base, *params);
        }
    }
    let single = CodeParameters::new(n * params.block_len, n * params.channel_uses);
    let code = DestackedCode {
        inner: stacked,
        stacked_params: *params,
    };
    (Arc::new(code), single)
}

impl DestackedCode {
    /// Stacked history for periods `1..=periods` from single-layer history.
    fn regroup(&self, received: &[Vec<Signal>], periods: usize) -> Vec<Vec<Vec<Signal>>> {
        let n = self.inner.layers();
        assert!(received.len() >= periods * n, "destacked code read a same-period output");
        (0..periods)
            .map(|p| {
                let period = &received[p * n..(p + 1) * n];
                let edges = period.first().map_or(0, Vec::len);
                (0..edges)
                    .map(|i| period.iter().map(|step| step[i].clone()).collect())
                    .collect()
            })
            .collect()
    }
}

impl CodingPolicy for DestackedCode {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn encode(&self, view: &EncoderView<'_>, rng: &RngStream) -> Result<Vec<Signal>, NetError> {
        let n = self.inner.layers();
        let t = (view.t - 1) / n + 1;
        let lane = (view.t - 1) % n;
        let received = self.regroup(view.received, t - 1);
        let stacked = StackedEncoderView {
            base: view.net,
            layers: n,
            params: &self.stacked_params,
            node: view.node,
            t,
            source: view.source,
            received: &received,
            in_edges: view.in_edges,
            out_edges: view.out_edges,
        };
        let out = self.inner.encode(&stacked, rng)?;
        out.into_iter()
            .map(|mut lanes| {
                if lanes.len() != n {
                    return Err(NetError::LayerMismatch {
                        expected: n,
                        got: lanes.len(),
                    });
                }
                Ok(lanes.swap_remove(lane))
            })
            .collect()
    }

    fn decode(&self, view: &DecoderView<'_>, rng: &RngStream) -> Result<Vec<usize>, NetError> {
        let received = self.regroup(view.received, self.stacked_params.channel_uses);
        let stacked = StackedDecoderView {
            base: view.net,
            layers: self.inner.layers(),
            params: &self.stacked_params,
            demand: view.demand,
            node: view.node,
            source: view.source,
            received: &received,
            in_edges: view.in_edges,
        };
        self.inner.decode(&stacked, rng)
    }

    fn check(&self, net: &NetworkSpec, params: &CodeParameters) -> Result<(), NetError> {
        let n = self.inner.layers();
        if params.block_len != n * self.stacked_params.block_len
            || params.channel_uses != n * self.stacked_params.channel_uses
        {
            return Err(NetError::InvalidParams(*params));
        }
        self.inner.check(&stack_network(net, n)?, &self.stacked_params)
    }

    fn time_keying(&self) -> TimeKeying {
        TimeKeying::Interleaved {
            layers: self.inner.layers(),
        }
    }
}
