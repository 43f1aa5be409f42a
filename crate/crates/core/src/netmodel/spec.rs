use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::probkit::{DistortionMeasure, Kernel};

use super::SourceModel;

/// Zero-based node index. Displayed and serialized 1-based, matching the
/// `1..m` numbering used in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.0 as u64 + 1)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let id = u64::deserialize(d)?;
        if id == 0 {
            return Err(serde::de::Error::custom("node ids start at 1"));
        }
        Ok(NodeId(id as usize - 1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Dmc(Kernel),
    /// Noiseless link carrying at most `floor(t * rate)` bits by time `t`.
    BitPipe { rate: f64 },
}

impl ChannelSpec {
    pub fn is_pipe(&self) -> bool {
        matches!(self, ChannelSpec::BitPipe { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub channel: ChannelSpec,
}

/// Node `sink` wants to reconstruct the source observed at node `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    pub source: NodeId,
    pub sink: NodeId,
    pub distortion: DistortionMeasure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub nodes: usize,
    /// Edge ids are positions in this list; they fix the canonical ordering of
    /// vector-valued node inputs and outputs.
    pub edges: Vec<Edge>,
    pub sources: SourceModel,
    pub demands: Vec<Demand>,
}

impl NetworkSpec {
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes).map(NodeId)
    }

    /// Edge ids leaving `node`, ascending.
    pub fn out_edges(&self, node: NodeId) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].from == node)
            .collect()
    }

    /// Edge ids entering `node`, ascending.
    pub fn in_edges(&self, node: NodeId) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].to == node)
            .collect()
    }

    /// Largest per-letter distortion over all demands; 0 with no demands.
    pub fn d_max(&self) -> f64 {
        self.demands
            .iter()
            .map(|d| d.distortion.max())
            .fold(0.0, f64::max)
    }

    pub fn reachable(&self, from: NodeId, to: NodeId) -> bool {
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if v.0 >= self.nodes || seen[v.0] {
                continue;
            }
            seen[v.0] = true;
            stack.extend(self.edges.iter().filter(|e| e.from == v).map(|e| e.to));
        }
        false
    }

    /// Same network with edge `edge` swapped for `channel`.
    pub fn with_channel(&self, edge: usize, channel: ChannelSpec) -> Self {
        let mut net = self.clone();
        net.edges[edge].channel = channel;
        net
    }
}

/// Source symbols per block `L` and channel uses per block `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParameters {
    pub block_len: usize,
    pub channel_uses: usize,
}

impl CodeParameters {
    pub fn new(block_len: usize, channel_uses: usize) -> Self {
        Self {
            block_len,
            channel_uses,
        }
    }

    /// `κ = L / n` as the exact ratio of its parts.
    pub fn kappa(&self) -> (usize, usize) {
        (self.block_len, self.channel_uses)
    }

    pub fn kappa_f64(&self) -> f64 {
        self.block_len as f64 / self.channel_uses as f64
    }

    pub fn same_rate(&self, other: &CodeParameters) -> bool {
        self.block_len * other.channel_uses == other.block_len * self.channel_uses
    }
}
