//! Numerical tolerances and default thresholds used across the crate.

/// Maximum deviation of a unit vector's norm from one.
pub const UNIT_NORM: f64 = 1e-9;

/// Maximum deviation of `RᵀR` from identity and of `det R` from one.
pub const ROTATION_ORTHONORMALITY: f64 = 1e-9;

/// Axis-angle ↔ matrix round-trip accuracy.
pub const ROUND_TRIP: f64 = 1e-8;

/// Vectors shorter than this have no defined direction.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Pairs with `‖p_i − p_j‖` or `‖q_i × q_j‖` below this are skipped.
pub const PAIR_DEGENERACY: f64 = 1e-9;

/// Below this rotation angle Rodrigues and its inverse use series expansions.
pub const SMALL_ANGLE: f64 = 1e-6;

/// Padding allowed around the `[−π, π]³` search domain.
pub const DOMAIN_PADDING: f64 = 1e-9;

/// Default pairwise inlier threshold (radians).
pub const DEFAULT_DELTA: f64 = 0.015;

/// Default translation inlier threshold as a fraction of the scene scale.
pub const DEFAULT_EPSILON_SCALE: f64 = 0.05;

/// 1D voting stops refining an interval when its half-width drops below
/// this fraction of the search domain width.
pub const VOTE_MIN_HALF_WIDTH: f64 = 1e-9;

/// Largest input accepted by the all-pairs strategy.
pub const ALL_PAIRS_CAP: usize = 200;

/// Default rotation search iteration budget.
pub const DEFAULT_ROTATION_MAX_ITERATIONS: usize = 200_000;

/// Default cap on the number of live branches in the rotation queue.
pub const DEFAULT_QUEUE_CAP: usize = 4_000_000;

/// Default 1D voting iteration budget.
pub const DEFAULT_VOTE_MAX_ITERATIONS: usize = 100_000;

/// Maximum number of grid rotations the brute-force oracle will evaluate.
pub const GRID_SAMPLE_BUDGET: u64 = 10_000_000;

/// A trial succeeds when the rotation error is below this (radians)...
pub const SUCCESS_ROTATION_ERROR: f64 = 0.1;

/// ...and the relative translation error is below this fraction.
pub const SUCCESS_TRANSLATION_ERROR: f64 = 0.2;
