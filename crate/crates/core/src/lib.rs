//! Globally optimal, outlier-robust absolute camera pose estimation.
//!
//! The pose problem is decoupled into two consensus-maximization searches:
//!
//! 1. Pairs of 2D-3D correspondences yield translation-free constraints
//!    `vᵀ R u = 0` with `v = q_i × q_j` and `u = p_i − p_j` ([`pairing`]).
//! 2. The rotation maximizing the number of satisfied constraints is found by
//!    branch-and-bound over the angle-axis cube ([`rotation`]).
//! 3. With the rotation fixed, each surviving pair yields one translation
//!    candidate and the three coordinates are voted independently by 1D
//!    branch-and-bound ([`translation`]).
//!
//! [`pipeline`] wires the stages together, [`oracle`] holds brute-force
//! reference solvers and [`bench`] generates synthetic scenes, runs trials and
//! reads/writes correspondence files.

pub mod bench;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod pairing;
pub mod pipeline;
pub mod rotation;
pub mod tolerances;
pub mod translation;

pub use error::{PoseError, Result};
pub use geometry::{AxisAngle, Pose, RotationMatrix, UnitVec3, Vec3, Vec9};
pub use pairing::{build_pairs, Correspondence, PairConstraint, PairSet, PairingMode, PairingStrategy};
pub use pipeline::{estimate_pose, PoseEstimate, SolverConfig};
pub use rotation::{solve_rotation, BoundKind, ConsensusReport, RotationCube, RotationSearchConfig};
pub use translation::{solve_translation, TranslationConfig, TranslationReport};
