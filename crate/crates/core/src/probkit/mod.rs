//! Finite-alphabet probability primitives.

mod dist;
mod distortion;
mod empirical;
mod info;
mod rng;
pub mod stats;

use thiserror::Error;

pub use dist::{sample_index, JointPmf, Kernel, ProbVector};
pub use distortion::DistortionMeasure;
pub use empirical::{empirical_type, EmpiricalJointType};
pub use info::{binary_entropy, entropy, l1_distance, l1_slices, mutual_information, tv_distance};
pub use rng::{Label, RngStream, Role, StreamAudit};

/// Absolute tolerance for "sums to one" checks.
pub const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("empty alphabet or sequence")]
    Empty,
    #[error("entry {index} is {value}, expected a finite nonnegative weight")]
    Negative { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("kernel row {row} has a different length")]
    RaggedKernel { row: usize },
    #[error("kernel row {row} is not a distribution: {source}")]
    InvalidRow { row: usize, source: Box<ProbError> },
    #[error("pair ({x}, {y}) is outside the alphabet")]
    SymbolOutOfRange { x: usize, y: usize },
    #[error("random stream {key:#018x} was claimed twice")]
    StreamReused { key: u64 },
}
