//! Implausibility operations and the weighted choice of which objects to
//! transform.

mod ops;
mod selection;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::SceneIndex;
use crate::math::Pose3;
use crate::scene::{Scene, SceneObject};

pub use ops::{
    apply_co_occurrence_location, apply_co_occurrence_rotation, apply_gravity, apply_intersection, apply_pose,
    apply_size, op_co_occurrence_location, op_co_occurrence_rotation, op_gravity, op_intersection, op_pose, op_size,
    Attempt,
};
pub use selection::{candidate_weights, select_objects, Candidates, SelectionState};

/// The six scene perturbations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplausibilityType {
    Gravity,
    Intersection,
    Pose,
    Size,
    CoOccurrenceLocation,
    CoOccurrenceRotation,
}

impl ImplausibilityType {
    pub const ALL: [ImplausibilityType; 6] = [
        ImplausibilityType::Gravity,
        ImplausibilityType::Intersection,
        ImplausibilityType::Pose,
        ImplausibilityType::Size,
        ImplausibilityType::CoOccurrenceLocation,
        ImplausibilityType::CoOccurrenceRotation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ImplausibilityType::Gravity => "gravity",
            ImplausibilityType::Intersection => "intersection",
            ImplausibilityType::Pose => "pose",
            ImplausibilityType::Size => "size",
            ImplausibilityType::CoOccurrenceLocation => "co_occurrence_location",
            ImplausibilityType::CoOccurrenceRotation => "co_occurrence_rotation",
        }
    }
}

impl fmt::Display for ImplausibilityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ImplausibilityType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match norm.as_str() {
            "gravity" => ImplausibilityType::Gravity,
            "intersection" => ImplausibilityType::Intersection,
            "pose" => ImplausibilityType::Pose,
            "size" => ImplausibilityType::Size,
            "co_occurrence_location" | "cooccurrence_location" | "co_loc" => ImplausibilityType::CoOccurrenceLocation,
            "co_occurrence_rotation" | "cooccurrence_rotation" | "co_rot" => ImplausibilityType::CoOccurrenceRotation,
            _ => return Err(Error::Schema(format!("unknown implausibility type {s}"))),
        })
    }
}

/// Pose change of an object carried along with a transformed supporter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseChange {
    pub object_id: String,
    pub pose_before: Pose3,
    pub pose_after: Pose3,
}

/// One applied implausibility operation.
///
/// `pose_before` is the pose in the scene the operation was computed on.
/// `co_moved` lists dependents that moved with the object, so that
/// [`commit`](TransformRecord::commit) and [`revert`](TransformRecord::revert)
/// reproduce the whole mutation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    #[serde(rename = "type")]
    pub kind: ImplausibilityType,
    pub object_id: String,
    pub pose_before: Pose3,
    pub pose_after: Pose3,
    pub draw_params: BTreeMap<String, f64>,
    #[serde(default)]
    pub co_moved: Vec<PoseChange>,
}

impl TransformRecord {
    pub fn commit(&self, scene: &mut Scene) -> Result<()> {
        scene.set_pose(&self.object_id, self.pose_after.clone())?;
        for c in &self.co_moved {
            scene.set_pose(&c.object_id, c.pose_after.clone())?;
        }
        Ok(())
    }

    pub fn revert(&self, scene: &mut Scene) -> Result<()> {
        for c in self.co_moved.iter().rev() {
            scene.set_pose(&c.object_id, c.pose_before.clone())?;
        }
        scene.set_pose(&self.object_id, self.pose_before.clone())
    }

    /// The object plus co-moved dependents.
    pub fn moved_ids(&self) -> Vec<String> {
        std::iter::once(self.object_id.clone())
            .chain(self.co_moved.iter().map(|c| c.object_id.clone()))
            .collect()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.draw_params.get(name).copied()
    }
}

/// Borrowed view of the scene an operation is computed against.
#[derive(Clone, Copy)]
pub struct OpContext<'a> {
    pub scene: &'a Scene,
    pub index: &'a SceneIndex,
    pub config: &'a Config,
}

pub fn is_transformation_allowed(obj: &SceneObject, t: ImplausibilityType) -> bool {
    obj.allowed_transforms.contains(&t)
}

/// Samples a transformation of type `t` for `object_id`. The scene is not
/// modified; commit the returned record once a camera validates it.
pub fn find_transformation<R: Rng + ?Sized>(
    ctx: OpContext<'_>,
    t: ImplausibilityType,
    object_id: &str,
    rng: &mut R,
) -> Result<TransformRecord> {
    let obj = ctx.scene.object(object_id)?;
    if !is_transformation_allowed(obj, t) {
        return Err(Error::NotAllowed {
            object: object_id.to_string(),
            kind: t,
        });
    }
    match t {
        ImplausibilityType::Gravity => op_gravity(ctx, object_id, rng),
        ImplausibilityType::Intersection => op_intersection(ctx, object_id, rng),
        ImplausibilityType::Pose => op_pose(ctx, object_id, rng),
        ImplausibilityType::Size => op_size(ctx, object_id, rng),
        ImplausibilityType::CoOccurrenceLocation => op_co_occurrence_location(ctx, object_id, rng),
        ImplausibilityType::CoOccurrenceRotation => op_co_occurrence_rotation(ctx, object_id, rng),
    }
}
