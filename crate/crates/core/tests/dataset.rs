mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scenegen::dataset::{
    check_leakage, dataset_stats, generate_scene_images, split_scenes, validate_json, DatasetManifest, SchemaKind,
};
use scenegen::{Config, Error, ImplausibilityType as T, SelectionState};
use serde_json::Value;

use common::*;

fn scenegen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scenegen"))
        .args(args)
        .env("SCENEGEN_WORKERS", "1")
        .output()
        .unwrap()
}

fn fixtures_arg() -> String {
    fixtures_dir().display().to_string()
}

/// Relative path → bytes for every file under `root`.
fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn validate_accepts_the_fixture_corpus() {
    let out = scenegen(&["validate", "--scenes", &fixtures_arg()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = String::from_utf8(out.stdout).unwrap();
    assert_eq!(lines.lines().count(), fixture_names().len());
}

#[test]
fn validate_rejects_a_broken_scene() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"name": "bad", "objects": 3}"#).unwrap();
    let out = scenegen(&["validate", "--scenes", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(out.stderr.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(err["error"], "schema_error");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["generate", "--scenes", "x"],
        vec!["generate", "--scenes", "x", "--out", "y", "--type", "gravity,pose"],
        vec!["generate", "--scenes", "x", "--out", "y", "--type", "levitation"],
        vec!["frobnicate"],
        vec!["split", "--train", "1"],
    ] {
        let out = scenegen(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
        assert_eq!(err["error"], "usage");
    }
}

#[test]
fn generate_is_deterministic_and_well_formed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = scenegen(&[
            "generate", "--scenes", &fixtures_arg(), "--out", dir.path().to_str().unwrap(),
            "--type", "gravity", "--seed", "7",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ta = tree(a.path());
    assert_eq!(ta, tree(b.path()));

    let manifest = read_json(&a.path().join("manifest.json"));
    validate_json(SchemaKind::Manifest, &manifest).unwrap();
    let images = manifest["images"].as_array().unwrap();
    assert!(!images.is_empty());
    // Every image has a metadata file and vice versa.
    let listed: Vec<&str> = images.iter().map(|i| i["metadata"].as_str().unwrap()).collect();
    let on_disk: Vec<String> = ta
        .keys()
        .map(|p| p.to_string_lossy().replace('\\', "/"))
        .filter(|p| p.ends_with(".json") && p != "manifest.json")
        .collect();
    assert_eq!(listed.len(), on_disk.len());
    for entry in images {
        for key in ["image", "id_map", "metadata"] {
            assert!(ta.contains_key(Path::new(entry[key].as_str().unwrap())));
        }
    }

    // Sequences: first score exactly 1, then nonincreasing, one camera throughout.
    let mut sequences: BTreeMap<String, Vec<Value>> = BTreeMap::new();
    for rel in &listed {
        let meta = read_json(&a.path().join(rel));
        validate_json(SchemaKind::ImageMetadata, &meta).unwrap();
        let key = rel.rsplit_once('/').unwrap().0.to_string();
        sequences.entry(key).or_default().push(meta);
    }
    for (key, mut seq) in sequences {
        seq.sort_by_key(|m| m["image_index"].as_u64().unwrap());
        assert!((1..=6).contains(&seq.len()), "{key}");
        assert_eq!(seq[0]["plausibility_score"].as_f64(), Some(1.0));
        assert!(seq[0]["implausibility_type"].is_null());
        for (k, m) in seq.iter().enumerate() {
            assert_eq!(m["image_index"].as_u64(), Some(k as u64));
            assert_eq!(m["transform_count"].as_u64(), Some(k as u64));
            assert_eq!(m["transforms"].as_array().unwrap().len(), k);
            assert_eq!(m["camera"], seq[0]["camera"]);
            if k > 0 {
                assert_eq!(m["implausibility_type"], "gravity");
                let s = m["plausibility_score"].as_f64().unwrap();
                assert!(s <= seq[k - 1]["plausibility_score"].as_f64().unwrap(), "{key} image {k}");
            }
        }
        let ids: Vec<&str> = seq.last().unwrap()["transforms"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t["object_id"].as_str().unwrap())
            .collect();
        let mut unique = ids.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), ids.len(), "{key}");
    }
}

#[test]
fn score_recomputes_recorded_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = scenegen(&[
        "generate", "--scenes", &fixtures_arg(), "--out", dir.path().to_str().unwrap(),
        "--type", "size", "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let manifest = DatasetManifest::load(&dir.path().join("manifest.json")).unwrap();
    for entry in manifest.images.iter().take(12) {
        let path = dir.path().join(&entry.metadata);
        let out = scenegen(&["score", "--image-meta", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        let recorded = read_json(&path)["plausibility_score"].as_f64().unwrap();
        assert_eq!(text.trim().parse::<f64>().unwrap(), recorded);
        if entry.image_index == 0 {
            assert_eq!(text.trim(), "1.0");
        }
    }
    let missing = scenegen(&["score", "--image-meta", "/nonexistent/img.json"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn six_images_on_one_camera() {
    let config = Config::default();
    let scene = load_fixture("bedroom");
    let mut state = SelectionState::new(&config.target_distribution, 0);
    let seq = generate_scene_images(&scene, T::Gravity, &mut state, &config, 0, 0).unwrap();
    assert_eq!(seq.len(), 6);
    assert_eq!(seq[0].metadata.plausibility_score, 1.0);
    assert_eq!(seq[0].metadata.transform_count, 0);
    for w in seq.windows(2) {
        assert!(w[1].metadata.plausibility_score <= w[0].metadata.plausibility_score);
        assert_eq!(w[1].metadata.camera, w[0].metadata.camera);
    }
    // Each later image adds exactly one record to the previous ones.
    for k in 1..seq.len() {
        let (prev, cur) = (&seq[k - 1].metadata.transforms, &seq[k].metadata.transforms);
        assert_eq!(&cur[..k - 1], &prev[..]);
    }
    let mut again = SelectionState::new(&config.target_distribution, 0);
    let repeat = generate_scene_images(&scene, T::Gravity, &mut again, &config, 0, 0).unwrap();
    for (x, y) in seq.iter().zip(&repeat) {
        assert_eq!(x.output, y.output);
        assert_eq!(x.metadata, y.metadata);
    }
    assert_eq!(state, again);
}

#[test]
fn two_eligible_objects_give_at_most_three_images() {
    let config = Config::default();
    let mut specs = vec![cuboid_spec("floor", [-300.0, -300.0, -5.0], [300.0, 300.0, 0.0], &[])];
    let spots = [(-60.0, -40.0), (60.0, -40.0), (-60.0, 40.0), (60.0, 40.0), (0.0, 80.0), (0.0, -80.0)];
    let names = ["a", "b", "c", "d", "e", "f"];
    for (k, (n, (x, y))) in names.iter().zip(spots).enumerate() {
        let allowed: &[T] = if k < 2 { &[T::Gravity] } else { &[] };
        specs.push(cuboid_spec(n, [x - 10.0, y - 10.0, 0.0005], [x + 10.0, y + 10.0, 20.0], allowed));
    }
    let scene = build_scene(specs, &[]);
    let mut produced = 0;
    for seed in 0..4 {
        let mut state = SelectionState::new(&config.target_distribution, seed);
        let seq = generate_scene_images(&scene, T::Gravity, &mut state, &config, seed, 0).unwrap();
        assert!(seq.len() <= 3);
        produced = produced.max(seq.len());
    }
    assert!(produced >= 2);
    let mut state = SelectionState::new(&config.target_distribution, 0);
    assert!(matches!(
        generate_scene_images(&scene, T::Pose, &mut state, &config, 0, 0),
        Err(Error::NoCandidates)
    ));
}

#[test]
fn splits_are_disjoint_and_sized() {
    let names: Vec<String> = (0..65).map(|i| format!("room_{i:02}")).collect();
    let s = split_scenes(&names, 55, 10, 11).unwrap();
    assert_eq!((s.train.len(), s.test.len()), (55, 10));
    assert!(s.train.iter().all(|n| !s.test.contains(n)));
    let mut all: Vec<_> = s.train.iter().chain(&s.test).cloned().collect();
    all.sort();
    assert_eq!(all, names);
    assert_eq!(s, split_scenes(&names, 55, 10, 11).unwrap());

    let two = split_scenes(&names[..2], 1, 1, 0).unwrap();
    assert_eq!((two.train.len(), two.test.len()), (1, 1));
    assert_ne!(two.train, two.test);
    assert!(matches!(
        split_scenes(&names[..2], 2, 1, 0),
        Err(Error::InsufficientScenes { requested: 3, available: 2 })
    ));
}

#[test]
fn split_and_stats_over_a_generated_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let out = scenegen(&[
        "generate", "--scenes", &fixtures_arg(), "--out", root.to_str().unwrap(), "--type", "pose", "--seed", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let manifest_path = root.join("manifest.json");
    let out = scenegen(&[
        "split", "--manifest", manifest_path.to_str().unwrap(), "--train", "4", "--test", "1", "--seed", "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = DatasetManifest::load(&manifest_path).unwrap();
    validate_json(SchemaKind::Manifest, &read_json(&manifest_path)).unwrap();
    assert!(check_leakage(&manifest).unwrap().is_empty());
    let splits = manifest.splits.as_ref().unwrap();
    for img in &manifest.images {
        let in_train = splits.train.contains(&img.scene);
        let in_test = splits.test.contains(&img.scene);
        assert!(in_train != in_test, "{}", img.scene);
    }

    // Recount from the metadata files directly.
    let mut per_class: BTreeMap<String, u64> = BTreeMap::new();
    let mut per_scene: BTreeMap<String, u64> = BTreeMap::new();
    for img in &manifest.images {
        let meta = read_json(&root.join(&img.metadata));
        let class = meta["implausibility_type"].as_str().unwrap_or("plausible").to_string();
        *per_class.entry(class).or_default() += 1;
        *per_scene.entry(meta["scene_name"].as_str().unwrap().to_string()).or_default() += 1;
    }
    let report = dataset_stats(&manifest, root).unwrap();
    assert_eq!(report.total_images, manifest.images.len() as u64);
    for (k, v) in &report.images_per_class {
        assert_eq!(*v, per_class.get(k).copied().unwrap_or(0), "{k}");
    }
    assert_eq!(report.images_per_scene, per_scene);
    assert_eq!(report.images_per_class["gravity"], 0);
    let shares: f64 = report.size_categories.values().map(|c| c.share).sum();
    assert!((shares - 1.0).abs() < 1e-12);

    let out = scenegen(&["stats", "--manifest", manifest_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed["total_images"].as_u64(), Some(report.total_images));
}

#[test]
fn plausible_only_manifest_has_no_implausible_counts() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let out = scenegen(&[
        "generate", "--scenes", &fixtures_arg(), "--out", root.to_str().unwrap(), "--type", "gravity", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut manifest = DatasetManifest::load(&root.join("manifest.json")).unwrap();
    manifest.images.retain(|i| i.image_index == 0);
    let report = dataset_stats(&manifest, root).unwrap();
    assert_eq!(report.images_per_class["plausible"], manifest.images.len() as u64);
    assert!(report.images_per_class.iter().all(|(k, v)| k == "plausible" || *v == 0));
    assert_eq!(report.transformed_objects, 0);
}

#[test]
fn corrupt_metadata_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let out = scenegen(&[
        "generate", "--scenes", &fixtures_arg(), "--out", root.to_str().unwrap(), "--type", "gravity", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let manifest = DatasetManifest::load(&root.join("manifest.json")).unwrap();
    std::fs::write(root.join(&manifest.images[0].metadata), "{not json").unwrap();
    assert!(matches!(dataset_stats(&manifest, root), Err(Error::CorruptMetadata { .. })));
    let out = scenegen(&["stats", "--manifest", root.join("manifest.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "corrupt_metadata");
}
