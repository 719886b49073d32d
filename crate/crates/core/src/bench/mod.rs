//! Synthetic benchmark harness and correspondence file I/O.

pub mod io;
pub mod scene;
pub mod trials;

pub use io::{parse_correspondences, read_correspondences, write_correspondences, RecordFormat};
pub use scene::{generate_scene, Aabb, OutlierType, PoseMode, Scene, SceneConfig};
pub use trials::{
    median, pose_errors, run_trials, success_rate, trial_seeds, write_trace_csv, write_trials_csv, RunOptions,
    SuccessCriterion, TrialResult,
};
