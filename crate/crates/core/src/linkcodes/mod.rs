//! Link-level constructions across the layers of a stacked network: channel
//! codes that make a noisy link act as a bit-pipe, and channel synthesis
//! that makes a bit-pipe act as a noisy link.

mod channel_code;
mod emulate;
pub mod packed;
mod relay;
mod synthesis;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infosolvers::SolverError;
use crate::netmodel::NetError;
use crate::probkit::ProbError;

pub use channel_code::{build_channel_code, ChannelCode};
pub use emulate::{
    continuity_bound, emulate_dmc_over_pipe, emulate_pipe_over_dmc, ideal_pipe, LinkCodeReport,
    SynthesisSchedule, SynthesisTransport,
};
pub use relay::BundleRelay;
pub use synthesis::{build_synthesis_code, SynthesisCode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkCodeConfig {
    /// Slack required below capacity (channel codes) or above mutual
    /// information (synthesis), bits per use.
    pub margin: f64,
    /// Largest allowed `⌈NR⌉`.
    pub cap_bits: usize,
    /// Skip the rate checks, for sweeps that cross the threshold on purpose.
    pub enforce_rate: bool,
}

impl Default for LinkCodeConfig {
    fn default() -> Self {
        Self {
            margin: 0.05,
            cap_bits: 22,
            enforce_rate: true,
        }
    }
}

/// `⌈NR⌉`.
pub fn index_bits(layers: usize, rate: f64) -> usize {
    (layers as f64 * rate - 1e-9).ceil().max(0.0) as usize
}

/// `⌊NR⌋`.
pub fn message_bits(layers: usize, rate: f64) -> usize {
    (layers as f64 * rate + 1e-9).floor() as usize
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("rate must be finite and nonnegative, got {0}")]
    InvalidRate(f64),
    #[error("rate {rate} exceeds capacity {capacity} minus margin {margin}")]
    RateAboveCapacity { rate: f64, capacity: f64, margin: f64 },
    #[error("rate {rate} is below mutual information {information} plus margin {margin}")]
    RateBelowInformation { rate: f64, information: f64, margin: f64 },
    #[error("codebook needs {bits} index bits, cap is {cap}")]
    CodebookCap { bits: usize, cap: usize },
    #[error("pipe carries {available} bits per use, synthesis needs {needed}")]
    PipeTooNarrow { needed: usize, available: usize },
    #[error("edge {0} is not a DMC")]
    NotDmc(usize),
    #[error("code was built for a different channel than edge {0}")]
    ChannelMismatch(usize),
}

impl From<ProbError> for LinkError {
    fn from(e: ProbError) -> Self {
        LinkError::Net(e.into())
    }
}
