//! Translation recovery once the rotation is known.
//!
//! Pairs failing the pairwise test at the estimated rotation are dropped,
//! every surviving pair is solved for one translation, and each coordinate of
//! the translation is then chosen by an independent 1D consensus vote.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{PoseError, Result};
use crate::geometry::{RotationMatrix, Vec3};
use crate::pairing::{orthogonality_residual, Correspondence, PairConstraint};
use crate::tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationConfig {
    /// Pairwise threshold used to filter pairs, normally the rotation δ.
    pub delta: f64,
    /// Per-axis inlier threshold in world units. `None` derives it from the
    /// scene scale, see [`scene_scale`].
    pub epsilon: Option<f64>,
    pub max_iterations: usize,
}

impl Default for TranslationConfig {
    fn default() -> Self {
        TranslationConfig {
            delta: tolerances::DEFAULT_DELTA,
            epsilon: None,
            max_iterations: tolerances::DEFAULT_VOTE_MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationCandidate {
    pub t: Vec3,
    /// Depths `(λ_i, λ_j)` along the two bearings.
    pub depths: (f64, f64),
    pub source: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateRejection {
    /// Parallel bearings: the depths are not determined.
    RankDeficient,
    /// A solved depth is not positive.
    BehindCamera,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationReport {
    pub t: Vec3,
    pub per_axis_consensus: [usize; 3],
    pub candidate_count: usize,
    /// Pairs that passed the pairwise filter.
    pub filtered_pair_count: usize,
    pub epsilon: f64,
    pub surviving_pairs: Vec<(usize, usize)>,
}

/// Keeps pairs with `|∠(q_i × q_j, R (p_i − p_j)) − π/2| < δ`, dropping
/// degenerate ones.
pub fn filter_pairs(
    corrs: &[Correspondence],
    pairs: &[(usize, usize)],
    r: &RotationMatrix,
    delta: f64,
) -> Result<Vec<(usize, usize)>> {
    let kept: Vec<_> = pairs
        .iter()
        .copied()
        .filter(|&(i, j)| {
            if i == j {
                return false;
            }
            let (a, b) = (&corrs[i], &corrs[j]);
            let v = a.q.cross(&b.q);
            let u = a.p - b.p;
            if v.norm() < tolerances::PAIR_DEGENERACY || u.norm() < tolerances::PAIR_DEGENERACY {
                return false;
            }
            orthogonality_residual(&v, &(r * u)) < delta
        })
        .collect();
    if kept.is_empty() {
        return Err(PoseError::AllPairsRemoved);
    }
    Ok(kept)
}

/// Least-squares solve of `t = λ_i q_i − R p_i`, `t = λ_j q_j − R p_j` for
/// `(t, λ_i, λ_j)`.
///
/// Eliminating `t` leaves `λ_i q_i − λ_j q_j = R (p_i − p_j)`; the optimal `t`
/// is then the mean of the two per-point expressions.
pub fn pair_translation(
    a: &Correspondence,
    b: &Correspondence,
    r: &RotationMatrix,
) -> std::result::Result<TranslationCandidate, CandidateRejection> {
    let (qi, qj) = (a.q.into_inner(), b.q.into_inner());
    let (rpi, rpj) = (r * a.p, r * b.p);
    let w = rpi - rpj;
    let c = qi.dot(&qj);
    let det = 1.0 - c * c;
    if det.max(0.0).sqrt() < tolerances::PAIR_DEGENERACY {
        return Err(CandidateRejection::RankDeficient);
    }
    let (b1, b2) = (qi.dot(&w), -qj.dot(&w));
    let li = (b1 + c * b2) / det;
    let lj = (c * b1 + b2) / det;
    if !(li > 0.0 && lj > 0.0) {
        return Err(CandidateRejection::BehindCamera);
    }
    let t = ((qi * li - rpi) + (qj * lj - rpj)) * 0.5;
    Ok(TranslationCandidate { t, depths: (li, lj), source: (a.id, b.id) })
}

/// Outcome of a 1D consensus vote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisVote {
    pub value: f64,
    pub consensus: usize,
    pub iterations: usize,
    pub certified: bool,
}

struct Interval {
    center: f64,
    half_width: f64,
    upper: usize,
    lower: usize,
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .cmp(&other.upper)
            .then(self.lower.cmp(&other.lower))
            .then(other.half_width.total_cmp(&self.half_width))
            .then(other.center.total_cmp(&self.center))
    }
}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Interval {}

/// Values `s` of a sorted slice with `|t − s| ≤ radius`, as an index range.
fn window(sorted: &[f64], t: f64, radius: f64) -> (usize, usize) {
    let start = sorted.partition_point(|&s| t - s > radius);
    let end = sorted.partition_point(|&s| s - t <= radius);
    (start, end.max(start))
}

fn count_within(sorted: &[f64], t: f64, radius: f64) -> usize {
    let (start, end) = window(sorted, t, radius);
    end - start
}

/// Maximizes `Σ_s [|t − t_s| ≤ ε]` over `t ∈ [min t_s, max t_s]` by interval
/// bisection.
///
/// Among the maximizers, the returned value is the one closest to the median
/// of the values it agrees with.
pub fn vote_axis(values: &[f64], epsilon: f64, max_iterations: usize) -> Result<AxisVote> {
    if values.is_empty() {
        return Err(PoseError::EmptyValues);
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(PoseError::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PoseError::InvalidConfig("vote values must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let width = hi - lo;

    let make = |center: f64, half_width: f64| Interval {
        center,
        half_width,
        upper: count_within(&sorted, center, epsilon + half_width),
        lower: count_within(&sorted, center, epsilon),
    };

    let root = make(lo + 0.5 * width, 0.5 * width);
    let mut best = (root.lower, root.center);
    let min_half_width = tolerances::VOTE_MIN_HALF_WIDTH * width;
    let mut iterations = 0;
    let mut certified = false;
    let mut queue = BinaryHeap::from([root]);

    loop {
        let Some(top) = queue.pop() else {
            certified = true;
            break;
        };
        if top.upper <= best.0 {
            certified = true;
            break;
        }
        if iterations >= max_iterations {
            break;
        }
        if top.half_width < min_half_width {
            continue;
        }
        iterations += 1;
        let h = 0.5 * top.half_width;
        for child in [make(top.center - h, h), make(top.center + h, h)] {
            if child.lower > best.0 {
                best = (child.lower, child.center);
            }
            if child.upper > best.0 {
                queue.push(child);
            }
        }
    }

    let (count, center) = best;
    let value = refine_within_optimum(&sorted, center, epsilon);
    let refined = count_within(&sorted, value, epsilon);
    let (value, consensus) = if refined >= count { (value, refined) } else { (center, count) };
    Ok(AxisVote { value, consensus, iterations, certified })
}

// Every point of [max S − ε, min S + ε] agrees with all of S, the values
// within ε of `center`; pick the one closest to their median.
fn refine_within_optimum(sorted: &[f64], center: f64, epsilon: f64) -> f64 {
    let (start, end) = window(sorted, center, epsilon);
    let agree = &sorted[start..end];
    if agree.is_empty() {
        return center;
    }
    let mid = agree.len() / 2;
    let median = if agree.len() % 2 == 1 { agree[mid] } else { 0.5 * (agree[mid - 1] + agree[mid]) };
    let feasible_lo = agree[agree.len() - 1] - epsilon;
    let feasible_hi = agree[0] + epsilon;
    if feasible_lo > feasible_hi {
        return center;
    }
    median.clamp(feasible_lo, feasible_hi)
}

/// Diagonal of the bounding box of the world points used by `pairs`.
pub fn scene_scale(corrs: &[Correspondence], pairs: &[(usize, usize)]) -> f64 {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for &(i, j) in pairs {
        for p in [&corrs[i].p, &corrs[j].p] {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
    }
    if pairs.is_empty() {
        0.0
    } else {
        (hi - lo).norm()
    }
}

pub fn solve_translation(
    corrs: &[Correspondence],
    pairs: &[PairConstraint],
    r: &RotationMatrix,
    config: &TranslationConfig,
) -> Result<TranslationReport> {
    let indices: Vec<_> = pairs.iter().map(|c| c.source).collect();
    let surviving = filter_pairs(corrs, &indices, r, config.delta)?;

    let candidates: Vec<TranslationCandidate> =
        surviving.iter().filter_map(|&(i, j)| pair_translation(&corrs[i], &corrs[j], r).ok()).collect();
    if candidates.is_empty() {
        return Err(PoseError::NoCandidates);
    }

    let epsilon = match config.epsilon {
        Some(e) => e,
        None => {
            let scale = scene_scale(corrs, &surviving);
            if scale > 0.0 {
                tolerances::DEFAULT_EPSILON_SCALE * scale
            } else {
                tolerances::DEFAULT_EPSILON_SCALE
            }
        }
    };

    let mut t = Vec3::zeros();
    let mut per_axis_consensus = [0; 3];
    for axis in 0..3 {
        let values: Vec<f64> = candidates.iter().map(|c| c.t[axis]).collect();
        let vote = vote_axis(&values, epsilon, config.max_iterations)?;
        t[axis] = vote.value;
        per_axis_consensus[axis] = vote.consensus;
    }

    Ok(TranslationReport {
        t,
        per_axis_consensus,
        candidate_count: candidates.len(),
        filtered_pair_count: surviving.len(),
        epsilon,
        surviving_pairs: surviving,
    })
}
