use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetManifest, ImageMetadata};
use crate::error::{Error, Result};
use crate::perturb::ImplausibilityType;
use crate::scene::SizeCategory;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryShare {
    pub count: u64,
    pub share: f64,
    pub target: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub images: u64,
    pub transformed: u64,
    /// Share of this class among all transformed objects.
    pub transformed_share: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub total_images: u64,
    /// `plausible` plus one key per implausibility type.
    pub images_per_class: BTreeMap<String, u64>,
    pub transformed_objects: u64,
    pub size_categories: BTreeMap<SizeCategory, CategoryShare>,
    pub class_labels: BTreeMap<String, ClassShare>,
    pub images_per_scene: BTreeMap<String, u64>,
}

/// Counts over every metadata file referenced by `manifest`; relative paths
/// resolve against `root`.
///
/// Transformed objects are counted once per camera sequence, from its last
/// image.
pub fn dataset_stats(manifest: &DatasetManifest, root: &Path) -> Result<StatsReport> {
    let mut report = StatsReport {
        images_per_class: std::iter::once("plausible")
            .chain(ImplausibilityType::ALL.iter().map(|t| t.as_str()))
            .map(|k| (k.to_string(), 0))
            .collect(),
        ..Default::default()
    };
    let mut last_of_sequence: BTreeMap<(String, ImplausibilityType, u32), ImageMetadata> = BTreeMap::new();
    for entry in &manifest.images {
        let path = root.join(&entry.metadata);
        let meta = ImageMetadata::load(&path)?;
        let corrupt = |reason: String| Error::CorruptMetadata {
            path: path.clone(),
            reason,
        };
        if meta.transform_count as usize != meta.transforms.len() {
            return Err(corrupt(format!(
                "transform_count {} but {} transforms",
                meta.transform_count,
                meta.transforms.len()
            )));
        }
        if (meta.transform_count == 0) != meta.implausibility_type.is_none() {
            return Err(corrupt("implausibility_type inconsistent with transform_count".into()));
        }
        report.total_images += 1;
        let class = meta.implausibility_type.map_or("plausible", |t| t.as_str());
        *report.images_per_class.entry(class.to_string()).or_default() += 1;
        *report.images_per_scene.entry(meta.scene_name.clone()).or_default() += 1;
        for o in &meta.objects {
            report.class_labels.entry(o.class_label.clone()).or_default().images += 1;
        }
        let key = (meta.scene_name.clone(), entry.kind, entry.camera_index);
        let newer = last_of_sequence
            .get(&key)
            .is_none_or(|m| m.transform_count < meta.transform_count);
        if newer {
            last_of_sequence.insert(key, meta);
        }
    }

    let mut by_size: BTreeMap<SizeCategory, u64> = SizeCategory::ALL.iter().map(|&c| (c, 0)).collect();
    for meta in last_of_sequence.values() {
        for t in &meta.transformed_objects {
            report.transformed_objects += 1;
            *by_size.entry(t.size_category).or_default() += 1;
            report.class_labels.entry(t.class_label.clone()).or_default().transformed += 1;
        }
    }
    let total = report.transformed_objects.max(1) as f64;
    for (cat, count) in by_size {
        report.size_categories.insert(
            cat,
            CategoryShare {
                count,
                share: count as f64 / total,
                target: manifest.config.target_distribution.get(cat),
            },
        );
    }
    for share in report.class_labels.values_mut() {
        share.transformed_share = share.transformed as f64 / total;
    }
    Ok(report)
}
