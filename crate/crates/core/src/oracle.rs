//! Brute-force reference solvers.
//!
//! Nothing here reuses the optimized code paths: rotations come from
//! nalgebra's own exponential map and angles from `acos` of normalized dot
//! products, so these can falsify the main implementation.

use nalgebra::Rotation3;
use rayon::prelude::*;

use crate::error::{PoseError, Result};
use crate::geometry::{Pose, RotationMatrix, Vec3};
use crate::pairing::{Correspondence, PairConstraint};
use crate::tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Grid step over the axis-angle cube, in radians.
    pub resolution: f64,
}

impl GridSpec {
    /// Cells per axis: `[−π, π]` is split into `⌈2π / resolution⌉` cells and
    /// the grid samples their centres.
    pub fn cells_per_axis(&self) -> usize {
        let k = (2.0 * std::f64::consts::PI / self.resolution - 1e-9).ceil();
        (k as usize).max(1)
    }
}

fn naive_angle(a: &Vec3, b: &Vec3) -> f64 {
    (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
}

fn naive_count(constraints: &[PairConstraint], r: &RotationMatrix, delta: f64) -> usize {
    let mut count = 0;
    for c in constraints {
        let ru = r * c.u.into_inner();
        if (naive_angle(&c.v, &ru) - std::f64::consts::FRAC_PI_2).abs() < delta {
            count += 1;
        }
    }
    count
}

/// Evaluates the pairwise consensus at every grid point of `[−π, π]³` and
/// returns the best rotation with its count. Ties keep the first grid point
/// in x-major order.
pub fn grid_rotation_search(
    constraints: &[PairConstraint],
    delta: f64,
    grid: GridSpec,
) -> Result<(RotationMatrix, usize)> {
    if !(grid.resolution > 0.0) {
        return Err(PoseError::InvalidConfig(format!("grid resolution must be positive, got {}", grid.resolution)));
    }
    let k = grid.cells_per_axis();
    let samples = (k as u64).pow(3);
    if samples > tolerances::GRID_SAMPLE_BUDGET {
        return Err(PoseError::GridBudgetExceeded { samples, budget: tolerances::GRID_SAMPLE_BUDGET });
    }
    let step = 2.0 * std::f64::consts::PI / k as f64;
    let coord = |i: usize| -std::f64::consts::PI + (i as f64 + 0.5) * step;

    let (count, index, r) = (0..k)
        .into_par_iter()
        .map(|ix| {
            let mut best = (0usize, usize::MAX, RotationMatrix::identity());
            for iy in 0..k {
                for iz in 0..k {
                    let r = Rotation3::from_scaled_axis(Vec3::new(coord(ix), coord(iy), coord(iz))).into_inner();
                    let c = naive_count(constraints, &r, delta);
                    let index = (ix * k + iy) * k + iz;
                    if best.1 == usize::MAX || c > best.0 {
                        best = (c, index, r);
                    }
                }
            }
            best
        })
        .reduce(
            || (0, usize::MAX, RotationMatrix::identity()),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    debug_assert!(index != usize::MAX);
    Ok((r, count))
}

/// Exact maximum of `Σ_s [|t − t_s| ≤ ε]` by sorting and a sliding window of
/// width `2ε`. The centre is the midpoint of the best window's extreme values.
pub fn sweep_1d_consensus(values: &[f64], epsilon: f64) -> Result<(f64, usize)> {
    if values.is_empty() {
        return Err(PoseError::EmptyValues);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut best = (0usize, 0usize);
    let mut end = 0;
    for start in 0..v.len() {
        end = end.max(start);
        while end < v.len() && v[end] - v[start] <= 2.0 * epsilon {
            end += 1;
        }
        if end - start > best.0 {
            best = (end - start, start);
        }
    }
    let (count, start) = best;
    Ok((0.5 * (v[start] + v[start + count - 1]), count))
}

/// Number of correspondences with `∠(q_i, R p_i + t) < threshold`.
pub fn exhaustive_pose_check(corrs: &[Correspondence], pose: &Pose, angular_threshold: f64) -> usize {
    corrs
        .iter()
        .filter(|c| {
            let x = pose.rotation * c.p + pose.translation;
            x.norm() > 0.0 && naive_angle(&c.q, &x) < angular_threshold
        })
        .count()
}
