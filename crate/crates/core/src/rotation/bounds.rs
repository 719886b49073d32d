//! Consensus objective and the two bound families over an angle-axis cube.
//!
//! Both families evaluate the constraints once at the cube centre `R0` and
//! widen the inlier threshold by how far any rotation in the cube can move
//! the relevant quantity:
//!
//! - Hartley–Kahl: `R u` stays within `√3σ` of `R0 u`.
//! - Linear embedding: `x = vec(R)` stays within `α(σ)` of `x0 = vec(R0)` on
//!   the sphere of radius `√3` in ℝ⁹.

use std::f64::consts::PI;

use crate::geometry::{embed_rotation, AxisAngle, RotationMatrix, Vec9};
use crate::pairing::{orthogonality_residual, PairConstraint};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Branch of the axis-angle domain with cached bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationCube {
    pub center: AxisAngle,
    pub half_side: f64,
    pub upper: usize,
    pub lower: usize,
}

impl RotationCube {
    /// A cube with no bounds evaluated yet.
    pub fn new(center: AxisAngle, half_side: f64) -> Self {
        RotationCube { center, half_side, upper: 0, lower: 0 }
    }

    /// The initial domain `[−π, π]³`.
    pub fn root() -> Self {
        RotationCube::new(AxisAngle::identity(), PI)
    }

    /// Eight congruent children, split at the midpoint of every axis.
    pub fn subdivide(&self) -> [RotationCube; 8] {
        let h = self.half_side * 0.5;
        let c = self.center.0;
        std::array::from_fn(|k| {
            let sx = if k & 1 == 0 { -h } else { h };
            let sy = if k & 2 == 0 { -h } else { h };
            let sz = if k & 4 == 0 { -h } else { h };
            RotationCube::new(AxisAngle::new(c.x + sx, c.y + sy, c.z + sz), h)
        })
    }

    /// Volume as a fraction of the initial `(2π)³` cube.
    pub fn relative_volume(&self) -> f64 {
        (self.half_side / PI).powi(3)
    }

    pub fn contains(&self, r: &AxisAngle) -> bool {
        (r.0 - self.center.0).iter().all(|d| d.abs() <= self.half_side)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    HartleyKahl,
    LinearEmbedding,
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::HartleyKahl => "hartley",
            BoundKind::LinearEmbedding => "linear",
        }
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hartley" | "h" | "hartley-kahl" => Ok(BoundKind::HartleyKahl),
            "linear" | "l" => Ok(BoundKind::LinearEmbedding),
            other => Err(format!("unknown bound kind '{other}' (expected hartley or linear)")),
        }
    }
}

/// Number of constraints with `|∠(v, R u) − π/2| < δ`.
pub fn consensus_count(constraints: &[PairConstraint], r: &RotationMatrix, delta: f64) -> usize {
    constraints.iter().filter(|c| c.residual(r) < delta).count()
}

/// Threshold on `|∠(e, x) − π/2|` equivalent to `δ` on `|∠(v, R u) − π/2|`.
///
/// With `‖x‖ = √3`, `‖e‖ = 1` and `e·x = vᵀRu`, `cos∠(e, x) = cos∠(v, Ru)/√3`.
pub fn derive_tau(delta: f64) -> f64 {
    (delta.sin() / SQRT_3).asin()
}

/// Largest `∠(x, x0)` for rotations in a cube of half-side `σ`.
pub fn linear_margin(half_side: f64) -> f64 {
    let theta = (SQRT_3 * half_side).min(PI);
    ((1.0 + 2.0 * theta.cos()) / 3.0).clamp(-1.0, 1.0).acos()
}

/// `|∠(e, x) − π/2|` for the linear embedding.
pub fn linear_residual(e: &Vec9, x: &Vec9) -> f64 {
    let dot = e.dot(x);
    let cross = (e.norm_squared() * x.norm_squared() - dot * dot).max(0.0).sqrt();
    dot.atan2(cross).abs()
}

pub fn bounds_hartley(constraints: &[PairConstraint], cube: &RotationCube, delta: f64) -> (usize, usize) {
    let r0 = cube.center.to_matrix();
    let widened = delta + SQRT_3 * cube.half_side;
    let (mut upper, mut lower) = (0, 0);
    for c in constraints {
        let res = orthogonality_residual(&c.v, &(r0 * c.u.into_inner()));
        upper += (res < widened) as usize;
        lower += (res < delta) as usize;
    }
    (upper, lower)
}

pub fn bounds_linear(constraints: &[PairConstraint], cube: &RotationCube, tau: f64) -> (usize, usize) {
    let x0 = embed_rotation(&cube.center.to_matrix());
    let widened = tau + linear_margin(cube.half_side);
    let (mut upper, mut lower) = (0, 0);
    for c in constraints {
        let res = linear_residual(&c.e, &x0);
        upper += (res < widened) as usize;
        lower += (res < tau) as usize;
    }
    (upper, lower)
}

/// Constraints whose status inside a branch is still open, plus the number
/// known to hold at every rotation of the branch. Constraints in neither
/// group hold nowhere in the branch. Both facts carry over to every
/// sub-branch, so children only need to look at `open`.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct ActiveSet {
    pub open: Vec<usize>,
    pub always: usize,
}

impl ActiveSet {
    pub fn all(m: usize) -> Self {
        ActiveSet { open: (0..m).collect(), always: 0 }
    }
}

/// Fills the cached bounds of `cube`, evaluating only the constraints left
/// open by its parent, and returns the set left open by `cube`.
///
/// The bounds equal those of [`bounds_hartley`] / [`bounds_linear`] on the
/// full list. Settling rules:
///
/// - Hartley–Kahl: a descendant centre lies within `√3(σ − σ')` of this
///   centre, so `res ≥ δ + √3σ` stays excluded and `res + √3σ < δ` stays
///   satisfied.
/// - Linear: `α` is not superadditive, so exclusion needs `res ≥ τ + 2α(σ)`;
///   `res + α(σ) < τ` stays satisfied.
pub(crate) fn evaluate(
    constraints: &[PairConstraint],
    parent: &ActiveSet,
    cube: &mut RotationCube,
    kind: BoundKind,
    delta: f64,
    tau: f64,
) -> ActiveSet {
    let r0 = cube.center.to_matrix();
    let mut next = ActiveSet { open: Vec::with_capacity(parent.open.len()), always: parent.always };
    let (mut upper, mut lower) = (parent.always, parent.always);
    match kind {
        BoundKind::HartleyKahl => {
            let margin = SQRT_3 * cube.half_side;
            let widened = delta + margin;
            for &k in &parent.open {
                let c = &constraints[k];
                let res = orthogonality_residual(&c.v, &(r0 * c.u.into_inner()));
                if res >= widened {
                    continue;
                }
                upper += 1;
                lower += (res < delta) as usize;
                if res + margin < delta {
                    next.always += 1;
                } else {
                    next.open.push(k);
                }
            }
        }
        BoundKind::LinearEmbedding => {
            let x0 = embed_rotation(&r0);
            let margin = linear_margin(cube.half_side);
            let widened = tau + margin;
            for &k in &parent.open {
                let res = linear_residual(&constraints[k].e, &x0);
                upper += (res < widened) as usize;
                lower += (res < tau) as usize;
                if res + margin < tau {
                    next.always += 1;
                } else if res < tau + 2.0 * margin {
                    next.open.push(k);
                }
            }
        }
    }
    cube.upper = upper;
    cube.lower = lower;
    next
}
