use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::error::{PoseError, Result};
use crate::geometry::{AxisAngle, RotationMatrix};
use crate::pairing::PairConstraint;
use crate::tolerances;

use super::bounds::{derive_tau, evaluate, ActiveSet, BoundKind, RotationCube};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSearchConfig {
    /// Pairwise inlier threshold δ in radians, `0 < δ < π/2`.
    pub delta: f64,
    pub bound_kind: BoundKind,
    pub max_iterations: usize,
    /// Search stops uncertified once this many branches are queued.
    pub queue_capacity_cap: usize,
    pub record_trace: bool,
}

impl Default for RotationSearchConfig {
    fn default() -> Self {
        RotationSearchConfig {
            delta: tolerances::DEFAULT_DELTA,
            bound_kind: BoundKind::HartleyKahl,
            max_iterations: tolerances::DEFAULT_ROTATION_MAX_ITERATIONS,
            queue_capacity_cap: tolerances::DEFAULT_QUEUE_CAP,
            record_trace: true,
        }
    }
}

/// Search state after one subdivision round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTraceRow {
    pub iteration: usize,
    /// Largest upper bound still alive (or the best lower once the queue empties).
    pub best_upper: usize,
    pub best_lower: usize,
    pub queue_size: usize,
    /// Total volume of live branches relative to the initial cube.
    pub remaining_volume: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusReport {
    pub best_rotation: RotationMatrix,
    pub best_axis_angle: AxisAngle,
    /// Number of constraints with residual `< δ` at `best_rotation`.
    pub best_count: usize,
    pub inlier_constraint_ids: Vec<usize>,
    pub iterations: usize,
    pub explored_branches: usize,
    /// Upper and lower bounds met before any budget ran out.
    pub certified: bool,
    pub trace: Vec<BoundTraceRow>,
}

// Max-heap order: larger upper, then larger lower, then smaller cube, then
// the centre coordinates so equal-priority branches pop deterministically.
struct Branch(RotationCube, ActiveSet);

impl Ord for Branch {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        a.upper
            .cmp(&b.upper)
            .then(a.lower.cmp(&b.lower))
            .then(b.half_side.total_cmp(&a.half_side))
            .then(b.center.0.x.total_cmp(&a.center.0.x))
            .then(b.center.0.y.total_cmp(&a.center.0.y))
            .then(b.center.0.z.total_cmp(&a.center.0.z))
    }
}

impl PartialOrd for Branch {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Branch {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Branch {}

/// Best-first branch-and-bound over the axis-angle cube `[−π, π]³`,
/// maximizing the number of constraints with residual below `δ`.
pub fn solve_rotation(constraints: &[PairConstraint], config: &RotationSearchConfig) -> Result<ConsensusReport> {
    if constraints.is_empty() {
        return Err(PoseError::EmptyConstraints);
    }
    let delta = config.delta;
    if !(delta > 0.0 && delta < FRAC_PI_2) {
        return Err(PoseError::InvalidConfig(format!("delta must lie in (0, pi/2), got {delta}")));
    }
    let tau = derive_tau(delta);
    let kind = config.bound_kind;

    let mut root = RotationCube::root();
    let root_active = evaluate(constraints, &ActiveSet::all(constraints.len()), &mut root, kind, delta, tau);

    let mut best_lower = root.lower;
    let mut best_center = root.center;
    let mut explored = 1;
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut volume = 0.0;
    let mut queue = BinaryHeap::new();
    let mut certified = root.upper <= best_lower;

    if !certified {
        volume += root.relative_volume();
        queue.push(Branch(root, root_active));
    }

    while !certified {
        let Some(Branch(cube, active)) = queue.pop() else {
            certified = true;
            break;
        };
        if iterations >= config.max_iterations {
            queue.push(Branch(cube, active));
            break;
        }
        volume -= cube.relative_volume();
        iterations += 1;

        let mut children = cube.subdivide();
        let child_active = children.each_mut().map(|child| evaluate(constraints, &active, child, kind, delta, tau));
        explored += children.len();

        let previous = best_lower;
        for child in &children {
            if child.lower > best_lower {
                best_lower = child.lower;
                best_center = child.center;
            }
        }
        if best_lower > previous {
            queue.retain(|b| b.0.upper >= best_lower);
            volume = queue.iter().map(|b| b.0.relative_volume()).sum();
        }
        for (child, child_active) in children.into_iter().zip(child_active) {
            if child.upper >= best_lower {
                volume += child.relative_volume();
                queue.push(Branch(child, child_active));
            }
        }

        let top_upper = queue.peek().map(|b| b.0.upper);
        if config.record_trace {
            trace.push(BoundTraceRow {
                iteration: iterations,
                best_upper: top_upper.map_or(best_lower, |u| u.max(best_lower)),
                best_lower,
                queue_size: queue.len(),
                remaining_volume: volume.max(0.0),
            });
        }

        match top_upper {
            None => certified = true,
            Some(u) if u <= best_lower => certified = true,
            Some(_) if queue.len() > config.queue_capacity_cap => break,
            Some(_) => {}
        }
    }

    let best_rotation = best_center.to_matrix();
    let inlier_constraint_ids: Vec<usize> =
        constraints.iter().enumerate().filter(|(_, c)| c.residual(&best_rotation) < delta).map(|(k, _)| k).collect();

    Ok(ConsensusReport {
        best_rotation,
        best_axis_angle: best_center,
        best_count: inlier_constraint_ids.len(),
        inlier_constraint_ids,
        iterations,
        explored_branches: explored,
        certified,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rotation_angular_distance, Vec3};
    use crate::pairing::{build_pairs, Correspondence, PairingMode, PairingStrategy};
    use crate::rotation::bounds::consensus_count;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise_free_pairs(n: usize, r_true: &RotationMatrix, seed: u64) -> Vec<PairConstraint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = Vec3::new(-5.0, -5.0, 2.0);
        let corrs: Vec<_> = (0..n)
            .map(|id| {
                let p =
                    Vec3::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), rng.random_range(5.0..15.0));
                Correspondence::new(id, p, r_true * p + t).unwrap()
            })
            .collect();
        build_pairs(&corrs, &PairingStrategy::new(PairingMode::HalfN, seed)).unwrap().pairs
    }

    #[test]
    fn recovers_noise_free_rotation() {
        let r_true = AxisAngle::new(0.3, -0.5, 0.8).to_matrix();
        let cs = noise_free_pairs(100, &r_true, 1);
        assert_eq!(cs.len(), 50);
        for kind in [BoundKind::HartleyKahl, BoundKind::LinearEmbedding] {
            let config = RotationSearchConfig { delta: 0.01, bound_kind: kind, ..Default::default() };
            let report = solve_rotation(&cs, &config).unwrap();
            assert!(report.certified);
            assert_eq!(report.best_count, 50);
            assert!(rotation_angular_distance(&report.best_rotation, &r_true) < 0.1);
        }
    }

    #[test]
    fn rejects_empty_and_bad_delta() {
        assert_eq!(solve_rotation(&[], &RotationSearchConfig::default()), Err(PoseError::EmptyConstraints));
        let cs = noise_free_pairs(4, &RotationMatrix::identity(), 2);
        for delta in [0.0, -0.1, FRAC_PI_2, 2.0] {
            let config = RotationSearchConfig { delta, ..Default::default() };
            assert!(matches!(solve_rotation(&cs, &config), Err(PoseError::InvalidConfig(_))));
        }
    }

    #[test]
    fn single_constraint_satisfied_at_identity_certifies_immediately() {
        let cs = noise_free_pairs(2, &RotationMatrix::identity(), 3);
        assert_eq!(cs.len(), 1);
        let report = solve_rotation(&cs, &RotationSearchConfig::default()).unwrap();
        assert!(report.certified);
        assert_eq!(report.best_count, 1);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn iteration_budget_reports_uncertified() {
        let r_true = AxisAngle::new(0.3, -0.5, 0.8).to_matrix();
        let cs = noise_free_pairs(60, &r_true, 4);
        let config = RotationSearchConfig { delta: 0.001, max_iterations: 3, ..Default::default() };
        let report = solve_rotation(&cs, &config).unwrap();
        assert!(!report.certified);
        assert_eq!(report.iterations, 3);
        assert_eq!(report.best_count, consensus_count(&cs, &report.best_rotation, 0.001));
    }

    #[test]
    fn certificate_is_monotone() {
        let r_true = AxisAngle::new(-1.0, 0.2, 0.4).to_matrix();
        let mut cs = noise_free_pairs(60, &r_true, 5);
        // a few arbitrary constraints acting as outliers
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for c in cs.iter_mut().take(8) {
            let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            c.v = crate::geometry::unit(&v).unwrap();
            c.e = crate::geometry::embed_pair(&c.v, &c.u).unwrap();
        }
        for kind in [BoundKind::HartleyKahl, BoundKind::LinearEmbedding] {
            let config = RotationSearchConfig { delta: 0.02, bound_kind: kind, ..Default::default() };
            let report = solve_rotation(&cs, &config).unwrap();
            assert!(report.certified);
            for w in report.trace.windows(2) {
                assert!(w[1].best_lower >= w[0].best_lower);
                assert!(w[1].best_upper <= w[0].best_upper);
                assert!(w[1].remaining_volume <= w[0].remaining_volume + 1e-12);
            }
            let last = report.trace.last().unwrap();
            assert_eq!(last.best_upper, last.best_lower);
            assert!(report.best_count >= 22);
        }
    }

    #[test]
    fn deterministic_reports() {
        let r_true = AxisAngle::new(0.1, 0.2, 0.3).to_matrix();
        let cs = noise_free_pairs(40, &r_true, 7);
        let a = solve_rotation(&cs, &RotationSearchConfig::default()).unwrap();
        let b = solve_rotation(&cs, &RotationSearchConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
