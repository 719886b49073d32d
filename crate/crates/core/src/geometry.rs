//! Small fixed-size geometry: rotation representations, vector angles and the
//! 9-vector embeddings used by the linear bound family.

use nalgebra::{Matrix3, SVector, Unit, Vector3};

use crate::error::{PoseError, Result};
use crate::tolerances;

pub type Vec3 = Vector3<f64>;
pub type UnitVec3 = Unit<Vector3<f64>>;
/// A 3×3 matrix assumed to lie in SO(3). See [`is_rotation`].
pub type RotationMatrix = Matrix3<f64>;
pub type Vec9 = SVector<f64, 9>;

/// Rotation vector: direction is the axis, norm is the angle in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle(pub Vec3);

impl AxisAngle {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        AxisAngle(Vec3::new(x, y, z))
    }

    pub fn identity() -> Self {
        AxisAngle(Vec3::zeros())
    }

    pub fn angle(&self) -> f64 {
        self.0.norm()
    }

    pub fn to_matrix(&self) -> RotationMatrix {
        axis_angle_to_matrix(self)
    }
}

/// Camera pose mapping world points into the camera frame: `x_c = R x_w + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: RotationMatrix,
    pub translation: Vec3,
}

impl Pose {
    pub fn new(rotation: RotationMatrix, translation: Vec3) -> Self {
        Pose { rotation, translation }
    }

    pub fn identity() -> Self {
        Pose::new(RotationMatrix::identity(), Vec3::zeros())
    }

    pub fn transform(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }
}

pub fn skew(w: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// True when `RᵀR = I` and `det R = 1` within `tol`.
pub fn is_rotation(m: &RotationMatrix, tol: f64) -> bool {
    let gram = m.transpose() * m - Matrix3::identity();
    gram.iter().all(|g| g.abs() <= tol) && (m.determinant() - 1.0).abs() <= tol
}

/// Normalizes `v`, failing when it has no usable direction.
pub fn unit(v: &Vec3) -> Result<UnitVec3> {
    let n = v.norm();
    if !(n >= tolerances::DEGENERATE_NORM) || !n.is_finite() {
        return Err(PoseError::DegenerateVector(n));
    }
    // already unit up to rounding: keep as is so normalization is idempotent
    if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Ok(Unit::new_unchecked(*v));
    }
    Ok(Unit::new_unchecked(v / n))
}

/// Rodrigues' formula. The zero vector maps to the identity.
pub fn axis_angle_to_matrix(r: &AxisAngle) -> RotationMatrix {
    let theta = r.0.norm();
    if theta < tolerances::SMALL_ANGLE {
        let k = skew(&r.0);
        return Matrix3::identity() + k + 0.5 * k * k;
    }
    let k = skew(&(r.0 / theta));
    Matrix3::identity() + theta.sin() * k + (1.0 - theta.cos()) * (k * k)
}

/// Inverse of [`axis_angle_to_matrix`], returning an angle in `[0, π]`.
///
/// A half-turn has two equivalent axis signs; the returned axis then has its
/// first non-negligible component positive.
pub fn matrix_to_axis_angle(m: &RotationMatrix) -> AxisAngle {
    let cos_theta = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    // w = sin(θ)·axis
    let w = Vec3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]) * 0.5;
    let sin_theta = w.norm();
    let theta = sin_theta.atan2(cos_theta);

    if theta < tolerances::SMALL_ANGLE {
        return AxisAngle(w * (1.0 + theta * theta / 6.0));
    }
    if cos_theta > 0.0 {
        return AxisAngle(w * (theta / sin_theta));
    }

    // Past a quarter turn the symmetric part is better conditioned:
    // (R + Rᵀ)/2 − cos(θ)·I = (1 − cos θ)·a aᵀ.
    let sym = (m + m.transpose()) * 0.5 - Matrix3::identity() * cos_theta;
    let k = (0..3).max_by(|&a, &b| sym[(a, a)].total_cmp(&sym[(b, b)])).unwrap_or(0);
    let col: Vec3 = sym.column(k).into_owned();
    let mut axis = col / col.norm();

    let along = w.dot(&axis);
    if along.abs() > 1e-12 {
        if along < 0.0 {
            axis = -axis;
        }
    } else if let Some(lead) = axis.iter().copied().find(|c| c.abs() > 1e-12) {
        if lead < 0.0 {
            axis = -axis;
        }
    }
    AxisAngle(axis * theta)
}

/// Angle between two vectors in `[0, π]`, via `atan2(‖a×b‖, a·b)`.
pub fn angle_between(a: &Vec3, b: &Vec3) -> Result<f64> {
    for n in [a.norm(), b.norm()] {
        if !(n >= tolerances::DEGENERATE_NORM) {
            return Err(PoseError::DegenerateVector(n));
        }
    }
    Ok(a.cross(b).norm().atan2(a.dot(b)))
}

/// Geodesic distance on SO(3): `acos((trace(R1ᵀR2) − 1) / 2)`.
pub fn rotation_angular_distance(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    let tr = (r1.transpose() * r2).trace();
    ((tr - 1.0) * 0.5).clamp(-1.0, 1.0).acos()
}

/// Column-major stacking `(R11, R21, R31, R12, …, R33)`.
pub fn embed_rotation(m: &RotationMatrix) -> Vec9 {
    Vec9::from_column_slice(m.as_slice())
}

/// The 9-vector `e` with `e · embed_rotation(R) = vᵀ R u` for unit `v`, `u`.
///
/// Both inputs are normalized first, so `‖e‖ = 1`.
pub fn embed_pair(v: &Vec3, u: &Vec3) -> Result<Vec9> {
    let v = unit(v)?;
    let u = unit(u)?;
    Ok(embed_unit_pair(&v, &u))
}

pub(crate) fn embed_unit_pair(v: &UnitVec3, u: &UnitVec3) -> Vec9 {
    let outer = v.into_inner() * u.transpose();
    Vec9::from_column_slice(outer.as_slice())
}

/// Angle between two 9-vectors, same `atan2` form as [`angle_between`].
pub fn angle_between9(a: &Vec9, b: &Vec9) -> f64 {
    let dot = a.dot(b);
    let cross_sq = (a.norm_squared() * b.norm_squared() - dot * dot).max(0.0);
    cross_sq.sqrt().atan2(dot)
}
