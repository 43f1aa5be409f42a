use std::fmt;

use crate::probkit::RngStream;

use super::{CodeParameters, NetError, NetworkSpec, NodeId};

/// A value carried by one channel use: a DMC symbol or a batch of pipe bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Signal {
    Symbol(usize),
    Bits(Vec<bool>),
}

impl Signal {
    pub fn symbol(&self) -> Option<usize> {
        match self {
            Signal::Symbol(x) => Some(*x),
            Signal::Bits(_) => None,
        }
    }

    pub fn bits(&self) -> Option<&[bool]> {
        match self {
            Signal::Symbol(_) => None,
            Signal::Bits(b) => Some(b),
        }
    }

    pub fn empty_bits() -> Self {
        Signal::Bits(Vec::new())
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Symbol(x) => write!(f, "{x}"),
            Signal::Bits(bits) => bits
                .iter()
                .try_for_each(|&b| f.write_str(if b { "1" } else { "0" })),
        }
    }
}

impl serde::Serialize for Signal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Signal::Symbol(x) => s.serialize_u64(*x as u64),
            Signal::Bits(_) => s.serialize_str(&self.to_string()),
        }
    }
}

/// What node `node` may look at when choosing its time-`t` inputs.
pub struct EncoderView<'a> {
    pub net: &'a NetworkSpec,
    pub params: &'a CodeParameters,
    pub node: NodeId,
    pub t: usize,
    pub source: &'a [usize],
    /// `received[s][i]`: output at time `s + 1` of the `i`-th in-edge.
    /// Only times strictly before `t` are present.
    pub received: &'a [Vec<Signal>],
    pub in_edges: &'a [usize],
    pub out_edges: &'a [usize],
}

/// What the sink of a demand sees after the last channel use.
pub struct DecoderView<'a> {
    pub net: &'a NetworkSpec,
    pub params: &'a CodeParameters,
    pub demand: usize,
    pub node: NodeId,
    pub source: &'a [usize],
    pub received: &'a [Vec<Signal>],
    pub in_edges: &'a [usize],
}

/// How the engine labels per-use noise streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeKeying {
    /// Use `t` is keyed `(layer 1, time t)`.
    Plain,
    /// Use `τ = (t - 1) N + ℓ` is keyed `(layer ℓ, time t)`, matching the
    /// layer-by-layer keying of an `N`-layer stacked run.
    Interleaved { layers: usize },
}

impl TimeKeying {
    /// `(layer, time)`, both 1-based.
    pub fn key(self, tau: usize) -> (usize, usize) {
        match self {
            TimeKeying::Plain => (1, tau),
            TimeKeying::Interleaved { layers } => ((tau - 1) % layers + 1, (tau - 1) / layers + 1),
        }
    }
}

/// A block code for a network: causal per-node encoders and per-demand
/// decoders.
///
/// Encoders receive only past channel outputs and their own source block;
/// the engine never exposes anything else, so causality holds structurally.
/// Randomized codes draw from the stream they are handed, which is fixed per
/// (trial, node) or (trial, demand).
pub trait CodingPolicy: Send + Sync {
    fn name(&self) -> &str;

    /// Inputs for each out-edge, ordered as `view.out_edges`.
    fn encode(&self, view: &EncoderView<'_>, rng: &RngStream) -> Result<Vec<Signal>, NetError>;

    /// Reconstruction of the demanded source block, length `L`.
    fn decode(
        &self,
        view: &DecoderView<'_>,
        rng: &RngStream,
    ) -> Result<Vec<usize>, NetError>;

    /// Rejects networks or block parameters the code cannot run on.
    fn check(&self, _net: &NetworkSpec, _params: &CodeParameters) -> Result<(), NetError> {
        Ok(())
    }

    fn time_keying(&self) -> TimeKeying {
        TimeKeying::Plain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaved_keys() {
        let k = TimeKeying::Interleaved { layers: 3 };
        assert_eq!(k.key(1), (1, 1));
        assert_eq!(k.key(3), (3, 1));
        assert_eq!(k.key(4), (1, 2));
        assert_eq!(TimeKeying::Plain.key(7), (1, 7));
    }

    #[test]
    fn signal_display() {
        assert_eq!(Signal::Symbol(4).to_string(), "4");
        assert_eq!(Signal::Bits(vec![true, false, true]).to_string(), "101");
        assert_eq!(Signal::empty_bits().to_string(), "");
    }
}
