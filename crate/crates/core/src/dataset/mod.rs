//! Image sequences per scene, dataset layout on disk, splits and statistics.

mod generate;
mod schema;
mod split;
mod stats;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::camera::CameraSpec;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::ScreenBox;
use crate::perturb::{ImplausibilityType, TransformRecord};
use crate::scene::SizeCategory;

pub use generate::{
    generate_dataset, generate_scene_images, render_sequence, sequence_scores, GenerateOptions, GeneratedImage, WORKERS_ENV,
};
pub use schema::{validate_json, SchemaKind};
pub use split::{check_leakage, split_scenes};
pub use stats::{dataset_stats, StatsReport};

pub const METADATA_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectMetadata {
    pub id: String,
    pub class_label: String,
    pub bbox: ScreenBox,
    pub pixel_count: u64,
    pub visible_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformedObject {
    pub id: String,
    pub class_label: String,
    pub size_category: SizeCategory,
}

/// Sidecar JSON of one rendered image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageMetadata {
    pub schema_version: u32,
    pub scene_name: String,
    pub camera_index: u32,
    /// Position in the camera's sequence; equals `transform_count`.
    pub image_index: u32,
    pub camera: CameraSpec,
    pub implausibility_type: Option<ImplausibilityType>,
    pub transform_count: u32,
    /// Committed transformations; `pose_before` is the original placement.
    pub transforms: Vec<TransformRecord>,
    pub transformed_objects: Vec<TransformedObject>,
    /// Objects with at least one pixel, in scene order.
    pub objects: Vec<ObjectMetadata>,
    pub plausibility_score: f64,
    pub seed: u64,
}

impl ImageMetadata {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::CorruptMetadata {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    /// Score recomputed from the recorded boxes of transformed objects.
    pub fn recompute_score(&self) -> f64 {
        let ids: Vec<&str> = self.transforms.iter().map(|t| t.object_id.as_str()).collect();
        let boxes: Vec<ScreenBox> = self
            .objects
            .iter()
            .filter(|o| o.pixel_count > 0 && ids.contains(&o.id.as_str()))
            .map(|o| o.bbox)
            .collect();
        crate::render::score_from_boxes(&boxes, self.camera.image_size).value
    }
}

/// One image in the manifest; paths are relative to the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageEntry {
    pub scene: String,
    #[serde(rename = "type")]
    pub kind: ImplausibilityType,
    pub camera_index: u32,
    pub image_index: u32,
    pub image: String,
    pub id_map: String,
    pub metadata: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureEntry {
    pub scene: String,
    #[serde(rename = "type")]
    pub kind: ImplausibilityType,
    pub camera_index: u32,
    pub error: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Splits {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl Splits {
    pub fn split_of(&self, scene: &str) -> Option<&'static str> {
        let in_train = self.train.iter().any(|s| s == scene);
        let in_test = self.test.iter().any(|s| s == scene);
        match (in_train, in_test) {
            (true, false) => Some("train"),
            (false, true) => Some("test"),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub master_seed: u64,
    pub config: Config,
    pub scenes: Vec<String>,
    #[serde(default)]
    pub splits: Option<Splits>,
    pub images: Vec<ImageEntry>,
    #[serde(default)]
    pub failures: Vec<FailureEntry>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::CorruptMetadata {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Images per scene, for scenes with at least one image.
    pub fn images_per_scene(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for img in &self.images {
            *out.entry(img.scene.clone()).or_insert(0) += 1;
        }
        out
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Schema(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `out/<scene>/<type>/<camera>` relative to the output root.
pub fn sequence_dir(scene: &str, kind: ImplausibilityType, camera_index: u32) -> PathBuf {
    PathBuf::from(scene).join(kind.as_str()).join(camera_index.to_string())
}
