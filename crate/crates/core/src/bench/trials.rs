//! Repeated synthetic trials and their CSV serialization.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{rotation_angular_distance, Pose};
use crate::pipeline::{estimate_pose, PoseEstimate, SolverConfig};
use crate::rotation::{BoundKind, BoundTraceRow};
use crate::tolerances;

use super::scene::{generate_scene, OutlierType, PoseMode, SceneConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub outlier_ratio: f64,
    pub outlier_type: OutlierType,
    pub bound_kind: BoundKind,
    /// Angle between true and estimated rotation, radians.
    pub e_rot: f64,
    /// `‖t_true − t‖ / ‖t_true‖`.
    pub e_trans: f64,
    pub success: bool,
    pub rot_ms: f64,
    pub trans_ms: f64,
    pub rot_iterations: usize,
    pub certified: bool,
    pub error: Option<String>,
    /// Bound trace of the rotation search, kept only when requested.
    pub trace: Option<Vec<BoundTraceRow>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessCriterion {
    pub max_rotation_error: f64,
    pub max_translation_error: f64,
}

impl Default for SuccessCriterion {
    fn default() -> Self {
        SuccessCriterion {
            max_rotation_error: tolerances::SUCCESS_ROTATION_ERROR,
            max_translation_error: tolerances::SUCCESS_TRANSLATION_ERROR,
        }
    }
}

impl SuccessCriterion {
    pub fn accepts(&self, e_rot: f64, e_trans: f64) -> bool {
        e_rot < self.max_rotation_error && e_trans < self.max_translation_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub trials: usize,
    pub master_seed: u64,
    pub criterion: SuccessCriterion,
    /// Keep the rotation bound trace of the first trial.
    pub keep_first_trace: bool,
    /// Run trials on the rayon pool. Results are ordered by trial index either way.
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            trials: 10,
            master_seed: 0,
            criterion: SuccessCriterion::default(),
            keep_first_trace: false,
            parallel: true,
        }
    }
}

/// `(e_rot, e_trans)` of an estimate against ground truth.
pub fn pose_errors(truth: &Pose, estimate: &Pose) -> (f64, f64) {
    let e_rot = rotation_angular_distance(&truth.rotation, &estimate.rotation);
    let e_trans = (truth.translation - estimate.translation).norm() / truth.translation.norm();
    (e_rot, e_trans)
}

/// Per-trial seeds drawn from one stream seeded by `master_seed`.
pub fn trial_seeds(master_seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    (0..trials).map(|_| rng.random()).collect()
}

fn run_one(
    scene_cfg: &SceneConfig,
    solver: &SolverConfig,
    seed: u64,
    criterion: &SuccessCriterion,
    keep_trace: bool,
) -> TrialResult {
    let mut scene_cfg = *scene_cfg;
    scene_cfg.rng_seed = seed;
    if let PoseMode::RandomPose(_) = scene_cfg.pose_mode {
        scene_cfg.pose_mode = PoseMode::RandomPose(seed.rotate_left(17) ^ 0x5eed);
    }
    let mut solver = *solver;
    solver.pairing.rng_seed = seed.rotate_left(31) ^ 0x9a1;
    solver.rotation.record_trace = keep_trace;

    let mut result = TrialResult {
        seed,
        outlier_ratio: scene_cfg.outlier_ratio,
        outlier_type: scene_cfg.outlier_type,
        bound_kind: solver.rotation.bound_kind,
        e_rot: f64::NAN,
        e_trans: f64::NAN,
        success: false,
        rot_ms: 0.0,
        trans_ms: 0.0,
        rot_iterations: 0,
        certified: false,
        error: None,
        trace: None,
    };

    let outcome: Result<(Pose, PoseEstimate)> =
        generate_scene(&scene_cfg).and_then(|scene| Ok((scene.ground_truth, estimate_pose(&scene.corrs, &solver)?)));
    match outcome {
        Ok((truth, est)) => {
            let (e_rot, e_trans) = pose_errors(&truth, &est.pose);
            result.e_rot = e_rot;
            result.e_trans = e_trans;
            result.success = criterion.accepts(e_rot, e_trans);
            result.rot_ms = est.rotation_time.as_secs_f64() * 1e3;
            result.trans_ms = est.translation_time.as_secs_f64() * 1e3;
            result.rot_iterations = est.rotation.iterations;
            result.certified = est.rotation.certified;
            if keep_trace {
                result.trace = Some(est.rotation.trace);
            }
        }
        Err(err) => result.error = Some(err.to_string()),
    }
    result
}

/// Runs `options.trials` independent trials; the scene and pairing seeds of
/// trial `i` derive from the `i`-th seed of [`trial_seeds`].
pub fn run_trials(scene_cfg: &SceneConfig, solver: &SolverConfig, options: &RunOptions) -> Vec<TrialResult> {
    let seeds = trial_seeds(options.master_seed, options.trials);
    let job = |(i, seed): (usize, &u64)| {
        run_one(scene_cfg, solver, *seed, &options.criterion, options.keep_first_trace && i == 0)
    };
    if options.parallel {
        seeds.par_iter().enumerate().map(job).collect()
    } else {
        seeds.iter().enumerate().map(job).collect()
    }
}

pub const TRIAL_CSV_HEADER: &str =
    "seed,outlier_ratio,outlier_type,bound_kind,e_rot,e_trans,success,rot_ms,trans_ms,rot_iterations,error";

/// Writes one row per trial. With `include_timings == false` the two timing
/// columns are left empty so the output depends only on seeds and flags.
pub fn write_trials_csv<W: Write>(mut out: W, results: &[TrialResult], include_timings: bool) -> std::io::Result<()> {
    writeln!(out, "{TRIAL_CSV_HEADER}")?;
    for r in results {
        let (rot_ms, trans_ms) = if include_timings {
            (format!("{:.3}", r.rot_ms), format!("{:.3}", r.trans_ms))
        } else {
            (String::new(), String::new())
        };
        let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.outlier_ratio,
            r.outlier_type.code(),
            r.bound_kind,
            r.e_rot,
            r.e_trans,
            r.success,
            rot_ms,
            trans_ms,
            r.rot_iterations,
            error
        )?;
    }
    Ok(())
}

pub const TRACE_CSV_HEADER: &str = "iteration,best_upper,best_lower,queue_size,remaining_volume";

pub fn write_trace_csv<W: Write>(mut out: W, trace: &[BoundTraceRow]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for row in trace {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.iteration, row.best_upper, row.best_lower, row.queue_size, row.remaining_volume
        )?;
    }
    Ok(())
}

pub fn success_rate(results: &[TrialResult]) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    results.iter().filter(|r| r.success).count() as f64 / results.len() as f64
}

/// Median of a slice, ignoring NaNs. `None` for an empty input.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}
