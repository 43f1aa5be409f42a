//! Iterative solvers for channel capacity and the rate–distortion function.

mod capacity;
mod rate_distortion;

use thiserror::Error;

use crate::probkit::ProbError;

pub use capacity::{blahut_capacity, CapacityBounds, CapacityIteration, CapacityResult};
pub use rate_distortion::{blahut_rate_distortion, distortion_rate, rd_at_slope, RdPoint, RdResult};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("rate must be finite and nonnegative, got {0}")]
    InvalidRate(f64),
    #[error("distortion {target} is below the minimum achievable {min}")]
    InfeasibleDistortion { target: f64, min: f64 },
    #[error("source has {source_size} symbols but the distortion matrix has {rows} rows")]
    Dimension { source_size: usize, rows: usize },
}
