//! Synthetic pinhole scenes with controlled outliers and pixel noise.

use nalgebra::{UnitQuaternion, Vector4};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{PoseError, Result};
use crate::geometry::{Pose, RotationMatrix, Vec3};
use crate::pairing::Correspondence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutlierType {
    /// World points drawn from the inlier box, paired with random pixels.
    Type1,
    /// World points drawn from the unit cube `[0,1]³`, paired with random pixels.
    Type2,
}

impl OutlierType {
    pub fn code(&self) -> u8 {
        match self {
            OutlierType::Type1 => 1,
            OutlierType::Type2 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(OutlierType::Type1),
            2 => Some(OutlierType::Type2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoseMode {
    /// Identity rotation with the camera centred above the box, see [`ground_truth_pose`].
    IdentityPose,
    /// Uniform random rotation; the camera looks at the box centre from far
    /// enough away that every box point has positive depth.
    RandomPose(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn is_valid(&self) -> bool {
        (0..3).all(|k| self.min[k] < self.max[k] && self.min[k].is_finite() && self.max[k].is_finite())
    }

    fn sample(&self, rng: &mut impl Rng) -> Vec3 {
        Vec3::new(
            rng.random_range(self.min.x..self.max.x),
            rng.random_range(self.min.y..self.max.y),
            rng.random_range(self.min.z..self.max.z),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    /// Total correspondences, inliers plus outliers.
    pub n_points: usize,
    pub image_width: f64,
    pub image_height: f64,
    /// Focal length in pixels; the principal point is the image centre.
    pub focal: f64,
    pub point_box: Aabb,
    /// `N_outlier / (N_outlier + N_inlier)`.
    pub outlier_ratio: f64,
    pub outlier_type: OutlierType,
    pub noise_sigma_px: f64,
    pub pose_mode: PoseMode,
    pub rng_seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            n_points: 1000,
            image_width: 640.0,
            image_height: 480.0,
            focal: 1000.0,
            point_box: Aabb::new(Vec3::new(0.0, 0.0, 5.0), Vec3::new(10.0, 10.0, 15.0)),
            outlier_ratio: 0.0,
            outlier_type: OutlierType::Type1,
            noise_sigma_px: 1.0,
            pose_mode: PoseMode::IdentityPose,
            rng_seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PoseError::InvalidConfig(msg));
        if self.n_points < 2 {
            return bad(format!("scene needs at least 2 points, got {}", self.n_points));
        }
        if !(0.0..1.0).contains(&self.outlier_ratio) {
            return bad(format!("outlier ratio must lie in [0, 1), got {}", self.outlier_ratio));
        }
        if !self.point_box.is_valid() {
            return bad("point box must be nonempty and finite".into());
        }
        if !(self.focal > 0.0 && self.image_width > 0.0 && self.image_height > 0.0) {
            return bad("focal length and image size must be positive".into());
        }
        if !(self.noise_sigma_px >= 0.0 && self.noise_sigma_px.is_finite()) {
            return bad(format!("pixel noise must be non-negative, got {}", self.noise_sigma_px));
        }
        Ok(())
    }

    pub fn outlier_count(&self) -> usize {
        ((self.outlier_ratio * self.n_points as f64).round() as usize).min(self.n_points)
    }

    fn principal_point(&self) -> (f64, f64) {
        (self.image_width * 0.5, self.image_height * 0.5)
    }

    /// Unit bearing through pixel `(u, v)`.
    pub fn lift(&self, u: f64, v: f64) -> Vec3 {
        let (cx, cy) = self.principal_point();
        Vec3::new((u - cx) / self.focal, (v - cy) / self.focal, 1.0).normalize()
    }

    /// Pixel of a camera-frame point, `None` behind the camera.
    pub fn project(&self, x: &Vec3) -> Option<(f64, f64)> {
        if x.z <= 0.0 {
            return None;
        }
        let (cx, cy) = self.principal_point();
        Some((self.focal * x.x / x.z + cx, self.focal * x.y / x.z + cy))
    }

    pub fn in_image(&self, u: f64, v: f64) -> bool {
        (0.0..self.image_width).contains(&u) && (0.0..self.image_height).contains(&v)
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub corrs: Vec<Correspondence>,
    pub ground_truth: Pose,
    pub inlier_mask: Vec<bool>,
}

impl Scene {
    pub fn inlier_count(&self) -> usize {
        self.inlier_mask.iter().filter(|&&m| m).count()
    }
}

/// Uniformly distributed rotation (normalized 4D Gaussian quaternion).
pub fn random_rotation(rng: &mut impl Rng) -> RotationMatrix {
    loop {
        let q = Vector4::from_fn(|_, _| StandardNormal.sample(rng));
        if q.norm() > 1e-6 {
            let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::from_vector(q));
            return q.to_rotation_matrix().into_inner();
        }
    }
}

/// The camera pose used for a scene.
///
/// `IdentityPose` keeps `R = I` and places the camera at the box centre's
/// `(x, y)` at `z = 0`, so `t = −(c_x, c_y, 0)` is nonzero and the relative
/// translation error is defined.
pub fn ground_truth_pose(cfg: &SceneConfig) -> Pose {
    let c = cfg.point_box.center();
    match cfg.pose_mode {
        PoseMode::IdentityPose => Pose::new(RotationMatrix::identity(), -Vec3::new(c.x, c.y, 0.0)),
        PoseMode::RandomPose(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = random_rotation(&mut rng);
            // Back off until the box's bounding sphere fits in the narrower half field of view.
            let half_diagonal = 0.5 * (cfg.point_box.max - cfg.point_box.min).norm();
            let half_fov = (0.5 * cfg.image_width.min(cfg.image_height) / cfg.focal).atan();
            let axis = r.transpose() * Vec3::z();
            let camera = c - axis * (half_diagonal / half_fov.sin());
            Pose::new(r, -(r * camera))
        }
    }
}

const MAX_ATTEMPTS_PER_POINT: usize = 10_000;

pub fn generate_scene(cfg: &SceneConfig) -> Result<Scene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let pose = ground_truth_pose(cfg);
    let n_out = cfg.outlier_count();
    let n_in = cfg.n_points - n_out;
    let noise = Normal::new(0.0, cfg.noise_sigma_px).map_err(|e| PoseError::InvalidConfig(e.to_string()))?;

    let mut records: Vec<(Vec3, Vec3, bool)> = Vec::with_capacity(cfg.n_points);
    for _ in 0..n_in {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > MAX_ATTEMPTS_PER_POINT {
                return Err(PoseError::InvalidConfig("point box is not visible from the camera".into()));
            }
            let p = cfg.point_box.sample(&mut rng);
            let Some((u, v)) = cfg.project(&pose.transform(&p)) else { continue };
            if !cfg.in_image(u, v) {
                continue;
            }
            let (du, dv) =
                if cfg.noise_sigma_px > 0.0 { (noise.sample(&mut rng), noise.sample(&mut rng)) } else { (0.0, 0.0) };
            records.push((p, cfg.lift(u + du, v + dv), true));
            break;
        }
    }

    let outlier_box = match cfg.outlier_type {
        OutlierType::Type1 => cfg.point_box,
        OutlierType::Type2 => Aabb::new(Vec3::zeros(), Vec3::repeat(1.0)),
    };
    for _ in 0..n_out {
        let p = outlier_box.sample(&mut rng);
        let u = rng.random_range(0.0..cfg.image_width);
        let v = rng.random_range(0.0..cfg.image_height);
        records.push((p, cfg.lift(u, v), false));
    }
    records.shuffle(&mut rng);

    let mut corrs = Vec::with_capacity(records.len());
    let mut inlier_mask = Vec::with_capacity(records.len());
    for (id, (p, q, inlier)) in records.into_iter().enumerate() {
        corrs.push(Correspondence::new(id, p, q)?);
        inlier_mask.push(inlier);
    }
    Ok(Scene { corrs, ground_truth: pose, inlier_mask })
}
