//! Globally optimal rotation search over pairwise constraints.

mod bounds;
mod search;

pub use bounds::{
    bounds_hartley, bounds_linear, consensus_count, derive_tau, linear_margin, linear_residual, BoundKind, RotationCube,
};
pub use search::{solve_rotation, BoundTraceRow, ConsensusReport, RotationSearchConfig};
