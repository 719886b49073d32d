//! Pairwise orthogonality constraints.
//!
//! For two inlier correspondences the camera centre, both world points and
//! both bearings are coplanar. With `v = q_i × q_j` the plane normal and
//! `u = p_i − p_j`, the rotated direction `R u` lies in that plane, so
//! `vᵀ R u = 0` independently of the translation.

use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{PoseError, Result};
use crate::geometry::{embed_unit_pair, unit, RotationMatrix, UnitVec3, Vec3, Vec9};
use crate::tolerances;

/// One world point with its observed unit bearing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub id: usize,
    pub p: Vec3,
    pub q: UnitVec3,
}

impl Correspondence {
    /// Builds a correspondence, normalizing `bearing`.
    pub fn new(id: usize, p: Vec3, bearing: Vec3) -> Result<Self> {
        Ok(Correspondence { id, p, q: unit(&bearing)? })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairConstraint {
    /// Unit world-space direction `(p_i − p_j) / ‖p_i − p_j‖`.
    pub u: UnitVec3,
    /// Unit normal of the bearing plane `(q_i × q_j) / ‖q_i × q_j‖`.
    pub v: UnitVec3,
    /// Linear embedding of `(v, u)`, see [`crate::geometry::embed_pair`].
    pub e: Vec9,
    /// Positions of the two correspondences in the input slice.
    pub source: (usize, usize),
}

impl PairConstraint {
    /// Returns `None` when the points coincide or the bearings are parallel.
    pub fn from_correspondences(a: &Correspondence, b: &Correspondence, source: (usize, usize)) -> Option<Self> {
        if source.0 == source.1 {
            return None;
        }
        let du = a.p - b.p;
        let dv = a.q.cross(&b.q);
        if du.norm() < tolerances::PAIR_DEGENERACY || dv.norm() < tolerances::PAIR_DEGENERACY {
            return None;
        }
        let u = unit(&du).ok()?;
        let v = unit(&dv).ok()?;
        Some(PairConstraint { u, v, e: embed_unit_pair(&v, &u), source })
    }

    /// `|∠(v, R u) − π/2|`, in `[0, π/2]`.
    pub fn residual(&self, r: &RotationMatrix) -> f64 {
        orthogonality_residual(&self.v, &(r * self.u.into_inner()))
    }
}

/// `|∠(a, b) − π/2|` for nonzero vectors, computed as `|atan2(a·b, ‖a×b‖)|`.
pub fn orthogonality_residual(a: &Vec3, b: &Vec3) -> f64 {
    a.dot(b).atan2(a.cross(b).norm()).abs()
}

pub fn pair_residual(c: &PairConstraint, r: &RotationMatrix) -> f64 {
    c.residual(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingMode {
    /// Random perfect matching: each correspondence used at most once.
    HalfN,
    /// Each correspondence paired with `d` distinct random partners.
    Augmented(usize),
    /// Every unordered pair.
    AllPairs,
}

impl std::fmt::Display for PairingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PairingMode::HalfN => f.write_str("half"),
            PairingMode::Augmented(d) => write!(f, "augmented:{d}"),
            PairingMode::AllPairs => f.write_str("all"),
        }
    }
}

/// Parses `half`, `augmented:K` or `all`.
impl std::str::FromStr for PairingMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        match s.split_once(':') {
            None if s == "half" => Ok(PairingMode::HalfN),
            None if s == "all" => Ok(PairingMode::AllPairs),
            Some(("augmented", k)) => {
                k.parse::<usize>().map(PairingMode::Augmented).map_err(|_| format!("bad partner count '{k}' in '{s}'"))
            }
            _ => Err(format!("unknown pairing '{s}' (expected half, augmented:K or all)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairingStrategy {
    pub mode: PairingMode,
    pub rng_seed: u64,
    /// Largest `n` accepted by [`PairingMode::AllPairs`].
    pub all_pairs_cap: usize,
}

impl PairingStrategy {
    pub fn new(mode: PairingMode, rng_seed: u64) -> Self {
        PairingStrategy { mode, rng_seed, all_pairs_cap: tolerances::ALL_PAIRS_CAP }
    }
}

impl Default for PairingStrategy {
    fn default() -> Self {
        PairingStrategy::new(PairingMode::HalfN, 0)
    }
}

#[derive(Debug, Clone, Default)]
pub struct PairSet {
    pub pairs: Vec<PairConstraint>,
    /// Candidate pairings dropped for degenerate geometry.
    pub skipped: usize,
}

pub fn build_pairs(corrs: &[Correspondence], strategy: &PairingStrategy) -> Result<PairSet> {
    let n = corrs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(strategy.rng_seed);
    let candidates: Vec<(usize, usize)> = match strategy.mode {
        PairingMode::HalfN => {
            if n < 2 {
                return Err(PoseError::InvalidConfig(format!("half-n pairing needs n >= 2, got {n}")));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order.chunks_exact(2).map(|c| (c[0], c[1])).collect()
        }
        PairingMode::Augmented(d) => {
            if d == 0 {
                return Err(PoseError::InvalidConfig("augmented pairing needs d >= 1".into()));
            }
            if n < d + 1 {
                return Err(PoseError::InvalidConfig(format!(
                    "augmented pairing with d = {d} needs n >= {}, got {n}",
                    d + 1
                )));
            }
            let mut seen = HashSet::new();
            let mut out = Vec::with_capacity(n * d);
            for i in 0..n {
                for k in index::sample(&mut rng, n - 1, d) {
                    let j = if k < i { k } else { k + 1 };
                    if seen.insert((i.min(j), i.max(j))) {
                        out.push((i, j));
                    }
                }
            }
            out
        }
        PairingMode::AllPairs => {
            if n < 2 {
                return Err(PoseError::InvalidConfig(format!("all-pairs needs n >= 2, got {n}")));
            }
            if n > strategy.all_pairs_cap {
                return Err(PoseError::InvalidConfig(format!(
                    "all-pairs is limited to n <= {}, got {n}",
                    strategy.all_pairs_cap
                )));
            }
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
        }
    };

    let mut set = PairSet { pairs: Vec::with_capacity(candidates.len()), skipped: 0 };
    for (i, j) in candidates {
        match PairConstraint::from_correspondences(&corrs[i], &corrs[j], (i, j)) {
            Some(c) => set.pairs.push(c),
            None => set.skipped += 1,
        }
    }
    Ok(set)
}
