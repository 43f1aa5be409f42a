use std::fmt;
use std::sync::Arc;

use crate::netmodel::{ChannelSpec, Edge, NetError, NetworkSpec, NodeId};
use crate::probkit::RngStream;

/// Carries the bits of a bundled link for one stacked use.
pub trait BundleTransport: Send + Sync {
    /// Most bits accepted per stacked use.
    fn capacity(&self) -> usize;

    /// Delivered bits, same length as `bits`. `stream` is fixed per
    /// (trial, edge); implementations key per-use randomness on `t`.
    fn carry(&self, bits: &[bool], t: usize, stream: &RngStream) -> Result<Vec<bool>, NetError>;
}

/// Produces the `N` layer outputs of a DMC link from its `N` layer inputs.
pub trait LaneTransport: Send + Sync {
    fn transmit(&self, inputs: &[usize], t: usize, stream: &RngStream) -> Result<Vec<usize>, NetError>;
}

/// How one base edge behaves in the stacked network.
#[derive(Clone)]
pub enum StackedLink {
    /// `N` independent copies of the base channel, one lane per layer.
    Copies,
    /// A single lane of up to `bits` bits per stacked use. `None` delivers the
    /// bits unchanged.
    Bundle {
        bits: usize,
        transport: Option<Arc<dyn BundleTransport>>,
    },
    /// One symbol lane per layer, with outputs produced jointly by a transport.
    Emulated(Arc<dyn LaneTransport>),
}

impl fmt::Debug for StackedLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackedLink::Copies => write!(f, "Copies"),
            StackedLink::Bundle { bits, transport } => f
                .debug_struct("Bundle")
                .field("bits", bits)
                .field("coded", &transport.is_some())
                .finish(),
            StackedLink::Emulated(_) => write!(f, "Emulated"),
        }
    }
}

/// `N` copies of a base network whose corresponding nodes act jointly.
#[derive(Debug, Clone)]
pub struct StackedNetwork {
    pub base: NetworkSpec,
    pub layers: usize,
    pub links: Vec<StackedLink>,
}

pub fn stack_network(net: &NetworkSpec, layers: usize) -> Result<StackedNetwork, NetError> {
    if layers == 0 {
        return Err(NetError::InvalidLayerCount(layers));
    }
    Ok(StackedNetwork {
        base: net.clone(),
        layers,
        links: vec![StackedLink::Copies; net.edges.len()],
    })
}

impl StackedNetwork {
    pub fn with_link(mut self, edge: usize, link: StackedLink) -> Self {
        self.links[edge] = link;
        self
    }

    /// Signals per stacked use on `edge`.
    pub fn lanes(&self, edge: usize) -> usize {
        match self.links[edge] {
            StackedLink::Bundle { .. } => 1,
            _ => self.layers,
        }
    }

    pub fn all_copies(&self) -> bool {
        self.links.iter().all(|l| matches!(l, StackedLink::Copies))
    }

    /// Node instance id of `node` in `layer` (1-based), in `0..m·N`.
    pub fn instance(&self, node: NodeId, layer: usize) -> usize {
        node.0 * self.layers + layer - 1
    }

    /// Logical node an instance belongs to.
    pub fn group_of(&self, instance: usize) -> NodeId {
        NodeId(instance / self.layers)
    }

    /// The stacked topology written out over node instances. A bundled link
    /// appears once, between the layer-1 instances, as a pipe of its
    /// per-use bit count.
    pub fn expanded_edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (e, edge) in self.base.edges.iter().enumerate() {
            match &self.links[e] {
                StackedLink::Bundle { bits, .. } => out.push(Edge {
                    from: NodeId(self.instance(edge.from, 1)),
                    to: NodeId(self.instance(edge.to, 1)),
                    channel: ChannelSpec::BitPipe { rate: *bits as f64 },
                }),
                _ => out.extend((1..=self.layers).map(|l| Edge {
                    from: NodeId(self.instance(edge.from, l)),
                    to: NodeId(self.instance(edge.to, l)),
                    channel: edge.channel.clone(),
                })),
            }
        }
        out
    }
}
