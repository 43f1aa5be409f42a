//! Networks of point-to-point links, block codes on them, and a
//! time-stepped simulator.

pub mod codes;
mod engine;
mod estimate;
mod policy;
mod source;
mod spec;
mod validate;

use thiserror::Error;

use crate::probkit::ProbError;

pub use engine::{
    decoder_stream, encoder_stream, noise_stream, pipe_budget, run_block, run_block_with,
    source_stream, DemandTrace, EdgeTrace, PipeTiming, RunOptions, TraceRecord,
};
pub use estimate::{estimate_distortion, parallel_map, summarize, DistortionMatrix, WORKERS_ENV};
pub use policy::{CodingPolicy, DecoderView, EncoderView, Signal, TimeKeying};
pub use source::SourceModel;
pub use spec::{ChannelSpec, CodeParameters, Demand, Edge, NetworkSpec, NodeId};
pub use validate::{validate_spec, Diagnostic};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("invalid network: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidSpec(Vec<Diagnostic>),
    #[error("block parameters L={}, n={} are not supported", .0.block_len, .0.channel_uses)]
    InvalidParams(CodeParameters),
    #[error("node {node} produced {got} inputs for {expected} out-edges")]
    Arity {
        node: NodeId,
        expected: usize,
        got: usize,
    },
    #[error("edge {edge} at time {time}: input does not fit the channel")]
    BadSignal { edge: usize, time: usize },
    #[error("edge {edge} at time {time}: {sent} bits sent, budget {budget}")]
    PipeOverflow {
        edge: usize,
        time: usize,
        sent: usize,
        budget: usize,
    },
    #[error("demand {demand}: reconstruction has length {got}, expected {expected}")]
    ReconstructionLength {
        demand: usize,
        expected: usize,
        got: usize,
    },
    #[error("demand {demand}: reconstruction symbol {symbol} is outside the alphabet")]
    ReconstructionSymbol { demand: usize, symbol: usize },
    #[error("layer count must be at least 1, got {0}")]
    InvalidLayerCount(usize),
    #[error("expected {expected} layers, got {got}")]
    LayerMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Code(String),
}
