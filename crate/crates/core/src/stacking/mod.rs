//! Stacked networks: `N` copies of a network whose copies of each node act
//! jointly, with the constructions that move codes between a network and its
//! stacked version.

mod destack;
mod engine;
mod even_odd;
mod lift;
mod mixing;
mod network;
mod schedule;

use crate::netmodel::{parallel_map, summarize, CodeParameters, DistortionMatrix, NetError};
use crate::probkit::RngStream;

pub use destack::{destack_code, DestackedCode};
pub use engine::{
    link_stream, run_stacked, StackedCode, StackedDecoderView, StackedDemandTrace,
    StackedEncoderView, StackedTrace,
};
pub use even_odd::{even_odd_split, EvenOddCode};
pub use lift::{lift_code, LiftedCode};
pub use mixing::{class_dependence_tv, DEFAULT_WINDOW};
pub use network::{stack_network, BundleTransport, LaneTransport, StackedLink, StackedNetwork};
pub use schedule::InterleaveSchedule;

/// Per-trial stacked distortions, trial `i` on `rng.trial(i)`.
pub fn stacked_distortions(
    net: &StackedNetwork,
    code: &dyn StackedCode,
    params: &CodeParameters,
    trials: u64,
    rng: &RngStream,
) -> Result<Vec<Vec<f64>>, NetError> {
    parallel_map(trials, |i| {
        run_stacked(net, code, params, &rng.trial(i)).map(|tr| tr.distortions())
    })
}

/// Monte Carlo distortion matrix of a stacked code over length-`NL` blocks.
pub fn estimate_stacked(
    net: &StackedNetwork,
    code: &dyn StackedCode,
    params: &CodeParameters,
    trials: u64,
    rng: &RngStream,
) -> Result<DistortionMatrix, NetError> {
    let per_trial = stacked_distortions(net, code, params, trials, rng)?;
    Ok(summarize(&net.base, &per_trial))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::netmodel::codes::{FeedbackRepeat, UncodedRelay};
    use crate::netmodel::{
        run_block, ChannelSpec, CodingPolicy, Demand, Edge, NetworkSpec, NodeId, SourceModel,
    };
    use crate::probkit::{DistortionMeasure, Kernel, ProbVector};

    fn hop(p: f64) -> NetworkSpec {
        NetworkSpec {
            nodes: 2,
            edges: vec![Edge {
                from: NodeId(0),
                to: NodeId(1),
                channel: ChannelSpec::Dmc(Kernel::bsc(p).unwrap()),
            }],
            sources: SourceModel::single(2, NodeId(0), ProbVector::uniform(2)),
            demands: vec![Demand {
                source: NodeId(0),
                sink: NodeId(1),
                distortion: DistortionMeasure::hamming(2),
            }],
        }
    }

    fn two_way() -> NetworkSpec {
        let mut net = hop(0.11);
        net.edges.push(Edge {
            from: NodeId(1),
            to: NodeId(0),
            channel: ChannelSpec::Dmc(Kernel::bsc(0.05).unwrap()),
        });
        net
    }

    fn assert_coupled(net: &NetworkSpec, code: Arc<dyn CodingPolicy>, params: CodeParameters, layers: usize) {
        let stacked_net = stack_network(net, layers).unwrap();
        let lifted: Arc<dyn StackedCode> = Arc::new(lift_code(code, layers).unwrap());
        let (single, single_params) = destack_code(lifted.clone(), &params);
        let schedule = InterleaveSchedule::new(layers, params.channel_uses);
        for i in 0..20 {
            let trial = RngStream::new(77).trial(i);
            let s = run_stacked(&stacked_net, lifted.as_ref(), &params, &trial).unwrap();
            let d = run_block(net, single.as_ref(), &single_params, &trial).unwrap();
            for e in 0..net.edges.len() {
                for tau in 1..=schedule.total_time() {
                    let (l, t) = schedule.inverse(tau);
                    assert_eq!(d.edges[e].inputs[tau - 1], s.edges[e][l - 1].inputs[t - 1]);
                    assert_eq!(d.edges[e].outputs[tau - 1], s.edges[e][l - 1].outputs[t - 1]);
                }
            }
            assert_eq!(d.demands[0].reconstruction, s.demands[0].reconstruction);
            assert_eq!(d.demands[0].distortion, s.demands[0].distortion);
        }
    }

    #[test]
    fn destacked_relay_replays_stacked_run() {
        assert_coupled(&hop(0.11), Arc::new(UncodedRelay), CodeParameters::new(3, 3), 4);
    }

    #[test]
    fn destacked_feedback_replays_stacked_run() {
        assert_coupled(&two_way(), Arc::new(FeedbackRepeat), CodeParameters::new(2, 6), 3);
    }

    #[test]
    fn single_layer_destack_is_identity() {
        let code: Arc<dyn CodingPolicy> = Arc::new(UncodedRelay);
        let lifted: Arc<dyn StackedCode> = Arc::new(lift_code(code.clone(), 1).unwrap());
        let (back, params) = destack_code(lifted, &CodeParameters::new(2, 2));
        assert!(Arc::ptr_eq(&back, &code));
        assert_eq!(params, CodeParameters::new(2, 2));
    }

    #[test]
    fn lifted_distortion_is_layer_average() {
        let net = stack_network(&hop(0.2), 5).unwrap();
        let code = lift_code(Arc::new(UncodedRelay), 5).unwrap();
        let tr = run_stacked(&net, &code, &CodeParameters::new(4, 4), &RngStream::new(2)).unwrap();
        let d = &tr.demands[0];
        let mean: f64 = d.layer_distortions.iter().sum::<f64>() / 5.0;
        assert!((d.distortion - mean).abs() < 1e-12);
        assert_eq!(d.layer_distortions.len(), 5);
    }

    #[test]
    fn even_odd_split_routes_blocks() {
        let net = stack_network(&hop(0.0), 4).unwrap();
        let class: Arc<dyn StackedCode> = Arc::new(lift_code(Arc::new(UncodedRelay), 2).unwrap());
        let code = even_odd_split(class, 4).unwrap();
        let tr = run_stacked(&net, &code, &CodeParameters::new(3, 3), &RngStream::new(5)).unwrap();
        assert_eq!(tr.demands[0].block, tr.demands[0].reconstruction);
        for l in 0..4 {
            let sent: Vec<usize> = tr.edges[0][l].inputs.iter().map(|x| x.symbol().unwrap()).collect();
            assert_eq!(sent, tr.demands[0].block[3 * l..3 * l + 3]);
        }
        let odd: Arc<dyn StackedCode> = Arc::new(lift_code(Arc::new(UncodedRelay), 2).unwrap());
        assert!(even_odd_split(odd, 3).is_err());
    }

    #[test]
    fn layer_count_mismatch() {
        let net = stack_network(&hop(0.1), 3).unwrap();
        let code = lift_code(Arc::new(UncodedRelay), 2).unwrap();
        let err = run_stacked(&net, &code, &CodeParameters::new(1, 1), &RngStream::new(0));
        assert!(matches!(err, Err(NetError::LayerMismatch { expected: 3, got: 2 })));
    }
}
