use serde::Serialize;

use super::{ChannelSpec, NetworkSpec, NodeId};

/// One problem found in a network description. Node ids print 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    NoNodes,
    BadEndpoint { edge: usize, node: NodeId },
    SelfLoop { edge: usize, node: NodeId },
    InvalidKernel { edge: usize, reason: String },
    InvalidPipeRate { edge: usize, rate: f64 },
    SourceNodeCount { expected: usize, got: usize },
    InvalidSource { reason: String },
    NotMixing { reason: String },
    BadDemandNode { demand: usize, node: NodeId },
    DistortionShape { demand: usize, expected_rows: usize, got_rows: usize },
    InvalidDistortion { demand: usize, reason: String },
    DuplicateDemand { source: NodeId, sink: NodeId },
    UnreachableDemand { source: NodeId, sink: NodeId },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::NoNodes => write!(f, "network has no nodes"),
            Diagnostic::BadEndpoint { edge, node } => write!(f, "edge {edge}: node {node} does not exist"),
            Diagnostic::SelfLoop { edge, node } => write!(f, "edge {edge}: self-loop at node {node}"),
            Diagnostic::InvalidKernel { edge, reason } => write!(f, "edge {edge}: {reason}"),
            Diagnostic::InvalidPipeRate { edge, rate } => {
                write!(f, "edge {edge}: pipe rate {rate} is not a finite nonnegative number")
            }
            Diagnostic::SourceNodeCount { expected, got } => {
                write!(f, "source model covers {got} nodes, network has {expected}")
            }
            Diagnostic::InvalidSource { reason } => write!(f, "source: {reason}"),
            Diagnostic::NotMixing { reason } => write!(f, "source is not mixing: {reason}"),
            Diagnostic::BadDemandNode { demand, node } => {
                write!(f, "demand {demand}: node {node} does not exist")
            }
            Diagnostic::DistortionShape { demand, expected_rows, got_rows } => write!(
                f,
                "demand {demand}: distortion has {got_rows} rows, source alphabet has {expected_rows}"
            ),
            Diagnostic::InvalidDistortion { demand, reason } => write!(f, "demand {demand}: {reason}"),
            Diagnostic::DuplicateDemand { source, sink } => write!(f, "demand ({source}, {sink}) listed twice"),
            Diagnostic::UnreachableDemand { source, sink } => {
                write!(f, "demand ({source}, {sink}): no directed path")
            }
        }
    }
}

/// All problems with `net`; empty when the network is runnable.
pub fn validate_spec(net: &NetworkSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if net.nodes == 0 {
        out.push(Diagnostic::NoNodes);
    }
    let exists = |v: NodeId| v.0 < net.nodes;
    for (e, edge) in net.edges.iter().enumerate() {
        for node in [edge.from, edge.to] {
            if !exists(node) {
                out.push(Diagnostic::BadEndpoint { edge: e, node });
            }
        }
        if edge.from == edge.to {
            out.push(Diagnostic::SelfLoop { edge: e, node: edge.from });
        }
        match &edge.channel {
            ChannelSpec::Dmc(k) => {
                if let Err(err) = k.check() {
                    out.push(Diagnostic::InvalidKernel {
                        edge: e,
                        reason: err.to_string(),
                    });
                }
            }
            ChannelSpec::BitPipe { rate } => {
                if !rate.is_finite() || *rate < 0.0 {
                    out.push(Diagnostic::InvalidPipeRate { edge: e, rate: *rate });
                }
            }
        }
    }

    let alphabets = net.sources.alphabets();
    if alphabets.len() != net.nodes {
        out.push(Diagnostic::SourceNodeCount {
            expected: net.nodes,
            got: alphabets.len(),
        });
    }
    if let super::SourceModel::Markov { transition, .. } = &net.sources {
        match transition.check() {
            Err(err) => out.push(Diagnostic::InvalidSource {
                reason: err.to_string(),
            }),
            Ok(()) => {
                if let Some(reason) = net.sources.mixing_problem() {
                    out.push(Diagnostic::NotMixing { reason });
                }
            }
        }
    }

    let mut seen = std::collections::HashSet::new();
    for (d, demand) in net.demands.iter().enumerate() {
        let mut endpoints_ok = true;
        for node in [demand.source, demand.sink] {
            if !exists(node) {
                out.push(Diagnostic::BadDemandNode { demand: d, node });
                endpoints_ok = false;
            }
        }
        if let Err(err) = demand.distortion.check() {
            out.push(Diagnostic::InvalidDistortion {
                demand: d,
                reason: err.to_string(),
            });
        }
        if !endpoints_ok {
            continue;
        }
        if let Some(&expected) = alphabets.get(demand.source.0) {
            let got = demand.distortion.source_size();
            if got != expected {
                out.push(Diagnostic::DistortionShape {
                    demand: d,
                    expected_rows: expected,
                    got_rows: got,
                });
            }
        }
        if !seen.insert((demand.source, demand.sink)) {
            out.push(Diagnostic::DuplicateDemand {
                source: demand.source,
                sink: demand.sink,
            });
        }
        if !net.reachable(demand.source, demand.sink) {
            out.push(Diagnostic::UnreachableDemand {
                source: demand.source,
                sink: demand.sink,
            });
        }
    }
    out
}
