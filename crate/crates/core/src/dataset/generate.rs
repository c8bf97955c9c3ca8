use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    sequence_dir, write_json, DatasetManifest, FailureEntry, ImageEntry, ImageMetadata, ObjectMetadata,
    TransformedObject, MANIFEST_SCHEMA_VERSION, METADATA_SCHEMA_VERSION,
};
use crate::camera::{find_camera, CameraSpec};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::SceneIndex;
use crate::math::derive_seed;
use crate::perturb::{
    candidate_weights, find_transformation, is_transformation_allowed, select_objects, ImplausibilityType, OpContext,
    SelectionState, TransformRecord,
};
use crate::render::{plausibility_score, render_with, RenderMode, RenderOutput};
use crate::scene::{scene_files, Scene};

/// Environment variable overriding the worker count of [`generate_dataset`].
pub const WORKERS_ENV: &str = "SCENEGEN_WORKERS";

#[derive(Clone, Debug)]
pub struct GeneratedImage {
    pub output: RenderOutput,
    pub metadata: ImageMetadata,
}

/// Accumulates up to `transforms_per_camera` transformations of type `t`
/// that one camera sees, then renders the scene before any change and after
/// each one.
///
/// Objects are drawn one at a time with weights recomputed from `state`. A
/// drawn transformation is kept only if a camera is found for all kept
/// transformations so far and the plausibility scores of the sequence under
/// that camera do not increase. The last such camera is used for every image.
pub fn generate_scene_images(
    scene: &Scene,
    t: ImplausibilityType,
    state: &mut SelectionState,
    config: &Config,
    seed: u64,
    camera_index: u32,
) -> Result<Vec<GeneratedImage>> {
    if !scene.objects().iter().any(|o| is_transformation_allowed(o, t)) {
        return Err(Error::NoCandidates);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work = scene.clone();
    let mut index = SceneIndex::build(&work)?;
    let mut records: Vec<TransformRecord> = Vec::new();
    let mut tried = BTreeSet::new();
    let mut camera: Option<CameraSpec> = None;
    let n_c = config.transforms_per_camera;

    while records.len() < n_c {
        let cands = candidate_weights(&work, t, state, n_c)?;
        let (objects, weights): (Vec<String>, Vec<f64>) = cands
            .objects
            .into_iter()
            .zip(cands.weights)
            .filter(|(o, _)| !tried.contains(o))
            .unzip();
        if objects.is_empty() {
            break;
        }
        let obj = select_objects(&objects, &weights, 1, &mut rng)?.remove(0);
        tried.insert(obj.clone());

        let ctx = OpContext {
            scene: &work,
            index: &index,
            config,
        };
        let rec = match find_transformation(ctx, t, &obj, &mut rng) {
            Ok(r) => r,
            Err(e @ Error::TransformFailed { .. }) => {
                log::debug!("{}: {e}", scene.name);
                continue;
            }
            Err(e) => return Err(e),
        };
        rec.commit(&mut work)?;
        index.update(&work, &rec.moved_ids())?;
        records.push(rec);

        let found = find_camera(&work, &records, config, &mut rng)?;
        let valid = match &found {
            Some(cam) => scores_nonincreasing(scene, &records, cam)?,
            None => false,
        };
        if valid {
            camera = found;
            state.record(scene.object(&obj)?.size_category);
        } else {
            let rec = records.pop().expect("just pushed");
            rec.revert(&mut work)?;
            index.update(&work, &rec.moved_ids())?;
        }
    }

    let Some(camera) = camera else {
        return Err(Error::GenerationFailed {
            scene: scene.name.clone(),
            reason: format!("no camera validated a {t} transformation ({} objects tried)", tried.len()),
        });
    };
    render_sequence(scene, &records, &camera, t, seed, camera_index)
}

/// ID-pass scores of `scene` with `records[..k]` applied, for every `k`.
pub fn sequence_scores(scene: &Scene, records: &[TransformRecord], camera: &CameraSpec) -> Result<Vec<f64>> {
    let mut work = scene.clone();
    let mut index = SceneIndex::build(&work)?;
    let mut ids = Vec::with_capacity(records.len());
    let mut scores = Vec::with_capacity(records.len() + 1);
    for k in 0..=records.len() {
        if k > 0 {
            let r = &records[k - 1];
            r.commit(&mut work)?;
            index.update(&work, &r.moved_ids())?;
            ids.push(r.object_id.clone());
        }
        let out = render_with(&work, &index, camera, RenderMode::IdOnly)?;
        scores.push(plausibility_score(&out, &ids).value);
    }
    Ok(scores)
}

fn scores_nonincreasing(scene: &Scene, records: &[TransformRecord], camera: &CameraSpec) -> Result<bool> {
    let scores = sequence_scores(scene, records, camera)?;
    Ok(scores.windows(2).all(|w| w[1] <= w[0]))
}

/// Renders `scene` with `records[..k]` applied for `k = 0..=len`.
pub fn render_sequence(
    scene: &Scene,
    records: &[TransformRecord],
    camera: &CameraSpec,
    t: ImplausibilityType,
    seed: u64,
    camera_index: u32,
) -> Result<Vec<GeneratedImage>> {
    let mut work = scene.clone();
    let mut index = SceneIndex::build(&work)?;
    let mut out = Vec::with_capacity(records.len() + 1);
    for k in 0..=records.len() {
        if k > 0 {
            let r = &records[k - 1];
            r.commit(&mut work)?;
            index.update(&work, &r.moved_ids())?;
        }
        let applied = &records[..k];
        let ids: Vec<String> = applied.iter().map(|r| r.object_id.clone()).collect();
        let output = render_with(&work, &index, camera, RenderMode::Full)?;
        let score = plausibility_score(&output, &ids).value;
        let objects = work
            .objects()
            .iter()
            .filter_map(|o| {
                output.per_object.get(&o.id).map(|p| ObjectMetadata {
                    id: o.id.clone(),
                    class_label: o.class_label.clone(),
                    bbox: p.bbox,
                    pixel_count: p.pixel_count,
                    visible_fraction: p.visible_fraction,
                })
            })
            .collect();
        let transformed_objects = ids
            .iter()
            .map(|id| {
                let o = work.object(id)?;
                Ok(TransformedObject {
                    id: id.clone(),
                    class_label: o.class_label.clone(),
                    size_category: o.size_category,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let metadata = ImageMetadata {
            schema_version: METADATA_SCHEMA_VERSION,
            scene_name: scene.name.clone(),
            camera_index,
            image_index: k as u32,
            camera: camera.clone(),
            implausibility_type: (k > 0).then_some(t),
            transform_count: k as u32,
            transforms: applied.to_vec(),
            transformed_objects,
            objects,
            plausibility_score: score,
            seed,
        };
        out.push(GeneratedImage { output, metadata });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct GenerateOptions {
    pub scenes_dir: PathBuf,
    pub out_dir: PathBuf,
    pub types: Vec<ImplausibilityType>,
    /// Camera sequences attempted per scene and type.
    pub per_scene: u32,
    pub master_seed: u64,
    pub config: Config,
    /// Worker threads; `None` reads `SCENEGEN_WORKERS`, then uses all cores.
    pub workers: Option<usize>,
}

fn worker_count(opt: Option<usize>) -> Result<usize> {
    if let Some(n) = opt {
        return Ok(n);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{WORKERS_ENV}={v} is not a worker count"))),
        Err(_) => Ok(0),
    }
}

/// Generates every scene in `scenes_dir` and writes images, metadata and
/// `manifest.json` under `out_dir`. Output does not depend on worker count.
pub fn generate_dataset(opts: &GenerateOptions) -> Result<DatasetManifest> {
    opts.config.validate()?;
    let scenes = scene_files(&opts.scenes_dir)?
        .iter()
        .map(|p| Scene::load(p))
        .collect::<Result<Vec<_>>>()?;
    let mut names = BTreeSet::new();
    for s in &scenes {
        if s.name.is_empty() || s.name.contains(['/', '\\']) || s.name.starts_with('.') {
            return Err(Error::Schema(format!("scene name {:?} is not usable as a directory", s.name)));
        }
        if !names.insert(s.name.clone()) {
            return Err(Error::Schema(format!("duplicate scene name {}", s.name)));
        }
    }
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| Error::io(&opts.out_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(opts.workers)?)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<Result<(Vec<ImageEntry>, Vec<FailureEntry>)>> =
        pool.install(|| scenes.par_iter().map(|s| run_scene(s, opts)).collect());

    let mut manifest = DatasetManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        master_seed: opts.master_seed,
        config: opts.config.clone(),
        scenes: names.into_iter().collect(),
        splits: None,
        images: Vec::new(),
        failures: Vec::new(),
    };
    for r in results {
        let (images, failures) = r?;
        manifest.images.extend(images);
        manifest.failures.extend(failures);
    }
    manifest.save(&opts.out_dir.join("manifest.json"))?;
    Ok(manifest)
}

fn run_scene(scene: &Scene, opts: &GenerateOptions) -> Result<(Vec<ImageEntry>, Vec<FailureEntry>)> {
    let config = &opts.config;
    let mut state = SelectionState::new(
        &config.target_distribution,
        derive_seed(opts.master_seed, &[&scene.name]),
    );
    let mut images = Vec::new();
    let mut failures = Vec::new();
    for &t in &opts.types {
        for cam in 0..opts.per_scene {
            let seed = derive_seed(opts.master_seed, &[&scene.name, t.as_str(), &cam.to_string()]);
            match generate_scene_images(scene, t, &mut state, config, seed, cam) {
                Ok(seq) => images.extend(write_sequence(&opts.out_dir, &scene.name, t, cam, &seq)?),
                Err(e) => {
                    log::warn!("{} / {t} / camera {cam}: {e}", scene.name);
                    failures.push(FailureEntry {
                        scene: scene.name.clone(),
                        kind: t,
                        camera_index: cam,
                        error: e.kind().to_string(),
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    Ok((images, failures))
}

fn write_sequence(
    out_dir: &Path,
    scene: &str,
    t: ImplausibilityType,
    cam: u32,
    seq: &[GeneratedImage],
) -> Result<Vec<ImageEntry>> {
    let rel = sequence_dir(scene, t, cam);
    let dir = out_dir.join(&rel);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut entries = Vec::with_capacity(seq.len());
    for img in seq {
        let k = img.metadata.image_index;
        let (image, id_map, meta) = (format!("img_{k}.png"), format!("id_{k}.png"), format!("img_{k}.json"));
        img.output.write_color_png(&dir.join(&image))?;
        img.output.write_id_png(&dir.join(&id_map))?;
        write_json(&dir.join(&meta), &img.metadata)?;
        let rel_str = |f: &str| rel.join(f).to_string_lossy().replace('\\', "/");
        entries.push(ImageEntry {
            scene: scene.to_string(),
            kind: t,
            camera_index: cam,
            image_index: k,
            image: rel_str(&image),
            id_map: rel_str(&id_map),
            metadata: rel_str(&meta),
        });
    }
    Ok(entries)
}
