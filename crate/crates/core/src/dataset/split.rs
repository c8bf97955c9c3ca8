use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetManifest, Splits};
use crate::error::{Error, Result};

/// Random scene-level partition into `train_count` and `test_count` names.
/// Duplicate names are collapsed first; each side comes back sorted.
pub fn split_scenes(scenes: &[String], train_count: usize, test_count: usize, seed: u64) -> Result<Splits> {
    let mut names: Vec<String> = scenes.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let requested = train_count + test_count;
    if requested > names.len() {
        return Err(Error::InsufficientScenes {
            requested,
            available: names.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    names.shuffle(&mut rng);
    let mut train = names[..train_count].to_vec();
    let mut test = names[train_count..requested].to_vec();
    train.sort();
    test.sort();
    Ok(Splits { train, test })
}

/// Scenes whose images would land in both splits or in none.
pub fn check_leakage(manifest: &DatasetManifest) -> Result<Vec<String>> {
    let splits = manifest
        .splits
        .as_ref()
        .ok_or_else(|| Error::Schema("manifest has no splits".into()))?;
    let mut bad = BTreeSet::new();
    let train: BTreeSet<&str> = splits.train.iter().map(String::as_str).collect();
    let test: BTreeSet<&str> = splits.test.iter().map(String::as_str).collect();
    for s in train.intersection(&test) {
        bad.insert(s.to_string());
    }
    let mut train_images = BTreeSet::new();
    let mut test_images = BTreeSet::new();
    for img in &manifest.images {
        match splits.split_of(&img.scene) {
            Some("train") => {
                train_images.insert(img.scene.as_str());
            }
            Some(_) => {
                test_images.insert(img.scene.as_str());
            }
            None => {
                bad.insert(img.scene.clone());
            }
        }
    }
    for s in train_images.intersection(&test_images) {
        bad.insert(s.to_string());
    }
    Ok(bad.into_iter().collect())
}
