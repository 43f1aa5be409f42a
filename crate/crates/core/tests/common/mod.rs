#![allow(dead_code)]

use sepnet::netmodel::{ChannelSpec, Demand, Edge, NetworkSpec, NodeId, SourceModel};
use sepnet::probkit::{DistortionMeasure, Kernel, ProbVector};

pub fn dmc(from: usize, to: usize, k: Kernel) -> Edge {
    Edge {
        from: NodeId(from),
        to: NodeId(to),
        channel: ChannelSpec::Dmc(k),
    }
}

fn hamming_demand(source: usize, sink: usize) -> Demand {
    Demand {
        source: NodeId(source),
        sink: NodeId(sink),
        distortion: DistortionMeasure::hamming(2),
    }
}

/// Uniform bit at node 0 sent over one BSC to node 1.
pub fn single_bsc(p: f64) -> NetworkSpec {
    single_link(p, ProbVector::uniform(2))
}

pub fn single_link(p: f64, law: ProbVector) -> NetworkSpec {
    NetworkSpec {
        nodes: 2,
        edges: vec![dmc(0, 1, Kernel::bsc(p).unwrap())],
        sources: SourceModel::single(2, NodeId(0), law),
        demands: vec![hamming_demand(0, 1)],
    }
}

/// `0 → 1 → ... → hops` over BSC(p), demand from the first node to the last.
pub fn line(hops: usize, p: f64) -> NetworkSpec {
    NetworkSpec {
        nodes: hops + 1,
        edges: (0..hops).map(|i| dmc(i, i + 1, Kernel::bsc(p).unwrap())).collect(),
        sources: SourceModel::single(hops + 1, NodeId(0), ProbVector::uniform(2)),
        demands: vec![hamming_demand(0, hops)],
    }
}

/// Forward BSC(p) and backward BSC(q) between two nodes.
pub fn two_way(p: f64, q: f64) -> NetworkSpec {
    NetworkSpec {
        nodes: 2,
        edges: vec![dmc(0, 1, Kernel::bsc(p).unwrap()), dmc(1, 0, Kernel::bsc(q).unwrap())],
        sources: SourceModel::single(2, NodeId(0), ProbVector::uniform(2)),
        demands: vec![hamming_demand(0, 1)],
    }
}

/// Node 0 broadcasts over two BSCs to nodes 1 and 2, which both want its bit.
pub fn broadcast(p: f64) -> NetworkSpec {
    NetworkSpec {
        nodes: 3,
        edges: vec![dmc(0, 1, Kernel::bsc(p).unwrap()), dmc(0, 2, Kernel::bsc(p).unwrap())],
        sources: SourceModel::single(3, NodeId(0), ProbVector::uniform(2)),
        demands: vec![hamming_demand(0, 1), hamming_demand(0, 2)],
    }
}
