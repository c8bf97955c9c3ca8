//! Small linear-algebra layer over nalgebra: vectors, rotations, and the
//! translation/rotation/scale pose used for every scene object.

use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

const ROTATION_TOLERANCE: f64 = 1e-6;

/// Placement of a mesh in the world: `p_world = R * (s ⊙ p_local) + t`.
///
/// Scale is applied in the mesh's local frame before rotation, so non-uniform
/// scale never shears.
#[derive(Clone, Debug, PartialEq)]
pub struct Pose3 {
    pub translation: Vec3,
    pub rotation: Mat3,
    pub scale: Vec3,
}

impl Default for Pose3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose3 {
    pub fn identity() -> Self {
        Pose3 {
            translation: Vec3::zeros(),
            rotation: Mat3::identity(),
            scale: Vec3::repeat(1.0),
        }
    }

    pub fn new(translation: Vec3, rotation: Mat3, scale: Vec3) -> Result<Self> {
        let pose = Pose3 {
            translation,
            rotation,
            scale,
        };
        pose.validate()?;
        Ok(pose)
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Pose3 {
            translation,
            ..Self::identity()
        }
    }

    /// Pure rotation `r` about `pivot`.
    pub fn rotation_about(pivot: Vec3, rotation: Mat3) -> Self {
        Pose3 {
            translation: pivot - rotation * pivot,
            rotation,
            scale: Vec3::repeat(1.0),
        }
    }

    /// Uniform scaling by `factor` about `pivot`.
    pub fn scaling_about(pivot: Vec3, factor: f64) -> Self {
        Pose3 {
            translation: pivot - pivot * factor,
            rotation: Mat3::identity(),
            scale: Vec3::repeat(factor),
        }
    }

    pub fn from_quaternion(translation: [f64; 3], wxyz: [f64; 4], scale: [f64; 3]) -> Result<Self> {
        let [w, x, y, z] = wxyz;
        let q = Quaternion::new(w, x, y, z);
        let norm = q.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::InvalidPose(format!("quaternion {wxyz:?} has zero norm")));
        }
        let rotation = UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner();
        Pose3::new(translation.into(), rotation, scale.into())
    }

    /// Rotation as a `[w, x, y, z]` unit quaternion.
    pub fn quaternion_wxyz(&self) -> [f64; 4] {
        let rot = Rotation3::from_matrix_unchecked(self.rotation);
        let q = UnitQuaternion::from_rotation_matrix(&rot);
        [q.w, q.i, q.j, q.k]
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = self.translation.iter().all(|v| v.is_finite())
            && self.rotation.iter().all(|v| v.is_finite())
            && self.scale.iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidPose("non-finite component".into()));
        }
        let orthonormal_err = (self.rotation.transpose() * self.rotation - Mat3::identity()).amax();
        if orthonormal_err > ROTATION_TOLERANCE {
            return Err(Error::InvalidPose(format!(
                "rotation not orthonormal (error {orthonormal_err:e})"
            )));
        }
        let det = self.rotation.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Error::InvalidPose(format!("rotation determinant {det}")));
        }
        if self.scale.iter().any(|&s| s <= 0.0) {
            return Err(Error::InvalidPose(format!("non-positive scale {:?}", self.scale)));
        }
        Ok(())
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p.component_mul(&self.scale) + self.translation
    }

    /// Transform a vector (no translation), for a uniformly scaled pose.
    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v.component_mul(&self.scale)
    }

    pub fn is_uniform_scale(&self) -> bool {
        self.scale.x == self.scale.y && self.scale.y == self.scale.z
    }

    /// `delta ∘ self`: apply `self`, then the world-space map `delta`.
    ///
    /// `delta` must scale uniformly; a non-uniform world-space scale of a
    /// rotated object is not expressible as a translation/rotation/scale pose.
    pub fn then(&self, delta: &Pose3) -> Result<Pose3> {
        if !delta.is_uniform_scale() {
            return Err(Error::InvalidPose(format!(
                "delta scale must be uniform, got {:?}",
                delta.scale
            )));
        }
        let s = delta.scale.x;
        Ok(Pose3 {
            translation: delta.rotation * (self.translation * s) + delta.translation,
            rotation: delta.rotation * self.rotation,
            scale: self.scale * s,
        })
    }

    /// Homogeneous 4x4 matrix; used only as an independent cross-check.
    pub fn to_homogeneous(&self) -> nalgebra::Matrix4<f64> {
        let mut m = nalgebra::Matrix4::identity();
        let rs = self.rotation * Mat3::from_diagonal(&self.scale);
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rs);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Heading of the local +X axis around world Z, in degrees within [0, 360).
    pub fn yaw_degrees(&self) -> f64 {
        let x = self.rotation.column(0);
        x.y.atan2(x.x).to_degrees().rem_euclid(360.0)
    }
}

pub fn rotation_x(deg: f64) -> Mat3 {
    Rotation3::from_axis_angle(&Vector3::x_axis(), deg.to_radians()).into_inner()
}

pub fn rotation_y(deg: f64) -> Mat3 {
    Rotation3::from_axis_angle(&Vector3::y_axis(), deg.to_radians()).into_inner()
}

pub fn rotation_z(deg: f64) -> Mat3 {
    Rotation3::from_axis_angle(&Vector3::z_axis(), deg.to_radians()).into_inner()
}

/// Intrinsic Z·Y·X Euler rotation.
pub fn euler_zyx(z_deg: f64, y_deg: f64, x_deg: f64) -> Mat3 {
    rotation_z(z_deg) * rotation_y(y_deg) * rotation_x(x_deg)
}

/// Rotation angle of `r` in radians.
pub fn rotation_angle(r: &Mat3) -> f64 {
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    c.acos()
}

/// Stable 64-bit seed derived from a master seed and string parts.
///
/// Parts are length-prefixed so `("ab", "c")` and `("a", "bc")` differ.
pub fn derive_seed(master: u64, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseRepr {
    translation: [f64; 3],
    /// `[w, x, y, z]`
    rotation: [f64; 4],
    scale: [f64; 3],
}

impl Serialize for Pose3 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PoseRepr {
            translation: self.translation.into(),
            rotation: self.quaternion_wxyz(),
            scale: self.scale.into(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pose3 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PoseRepr::deserialize(deserializer)?;
        Pose3::from_quaternion(repr.translation, repr.rotation, repr.scale)
            .map_err(serde::de::Error::custom)
    }
}
