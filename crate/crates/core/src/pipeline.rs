//! End-to-end pose estimation: pairing, rotation search, translation vote.

use std::time::{Duration, Instant};

use crate::error::{PoseError, Result};
use crate::geometry::{Pose, Vec3};
use crate::pairing::{build_pairs, Correspondence, PairingStrategy};
use crate::rotation::{solve_rotation, ConsensusReport, RotationSearchConfig};
use crate::translation::{solve_translation, TranslationConfig, TranslationReport};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverConfig {
    pub pairing: PairingStrategy,
    pub rotation: RotationSearchConfig,
    /// `translation.delta` is overridden by `rotation.delta`.
    pub translation: TranslationConfig,
}

impl SolverConfig {
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.rotation.delta = delta;
        self.translation.delta = delta;
        self
    }
}

#[derive(Debug, Clone)]
pub struct PoseEstimate {
    pub pose: Pose,
    pub rotation: ConsensusReport,
    pub translation: TranslationReport,
    pub pair_count: usize,
    pub skipped_pairs: usize,
    pub rotation_time: Duration,
    pub translation_time: Duration,
}

pub fn estimate_pose(corrs: &[Correspondence], config: &SolverConfig) -> Result<PoseEstimate> {
    let start = Instant::now();
    let set = build_pairs(corrs, &config.pairing)?;
    if set.pairs.is_empty() {
        return Err(PoseError::EmptyConstraints);
    }
    let rotation = solve_rotation(&set.pairs, &config.rotation)?;
    let rotation_time = start.elapsed();

    let start = Instant::now();
    let translation_config = TranslationConfig { delta: config.rotation.delta, ..config.translation };
    let translation = solve_translation(corrs, &set.pairs, &rotation.best_rotation, &translation_config)?;
    let translation_time = start.elapsed();

    Ok(PoseEstimate {
        pose: Pose::new(rotation.best_rotation, translation.t),
        pair_count: set.pairs.len(),
        skipped_pairs: set.skipped,
        rotation,
        translation,
        rotation_time,
        translation_time,
    })
}

/// Ids of correspondences whose bearing is within `angular_threshold` of the
/// transformed world point.
pub fn pose_inliers(corrs: &[Correspondence], pose: &Pose, angular_threshold: f64) -> Vec<usize> {
    corrs
        .iter()
        .filter(|c| {
            let x: Vec3 = pose.transform(&c.p);
            x.norm() > 0.0 && c.q.cross(&x).norm().atan2(c.q.dot(&x)) < angular_threshold
        })
        .map(|c| c.id)
        .collect()
}
