//! Command-line front end. Errors are written to stderr as one JSON object
//! `{"error": <kind>, "message": <text>}`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::Config;
use crate::dataset::{
    check_leakage, dataset_stats, generate_dataset, split_scenes, validate_json, DatasetManifest, GenerateOptions,
    ImageMetadata, SchemaKind,
};
use crate::error::{Error, Result};
use crate::perturb::ImplausibilityType;
use crate::scene::{scene_files, Scene};

#[derive(Parser, Debug)]
#[command(name = "scenegen", version, about = "Implausible indoor scene dataset generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render image sequences for every scene in a directory.
    Generate {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One implausibility type, or `all` to run each type separately.
        #[arg(long = "type", value_parser = parse_types)]
        kind: TypeSelection,
        /// Camera sequences attempted per scene and type.
        #[arg(long, default_value_t = 1)]
        per_scene: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Worker threads (default: $SCENEGEN_WORKERS, then all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Split scenes into train and test sets.
    Split {
        #[arg(long)]
        train: usize,
        #[arg(long)]
        test: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Manifest to split; the splits are written back into it.
        #[arg(long, conflicts_with = "scenes", required_unless_present = "scenes")]
        manifest: Option<PathBuf>,
        /// Scene directory to split instead of a manifest; prints the splits.
        #[arg(long)]
        scenes: Option<PathBuf>,
    },
    /// Image and transformation counts of a generated dataset.
    Stats {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Recompute the plausibility score recorded in an image's metadata.
    Score {
        #[arg(long = "image-meta")]
        image_meta: PathBuf,
    },
    /// Check scene files against the schema and scene invariants.
    Validate {
        #[arg(long)]
        scenes: PathBuf,
    },
}

#[derive(Clone, Debug)]
struct TypeSelection(Vec<ImplausibilityType>);

fn parse_types(s: &str) -> std::result::Result<TypeSelection, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(TypeSelection(ImplausibilityType::ALL.to_vec()));
    }
    if s.contains(',') {
        return Err("one type per run (or `all`); types are never mixed in a sequence".into());
    }
    s.parse::<ImplausibilityType>()
        .map(|t| TypeSelection(vec![t]))
        .map_err(|e| e.to_string())
}

fn report(err: &Error) {
    let line = json!({ "error": err.kind(), "message": err.to_string() });
    let _ = writeln!(std::io::stderr(), "{line}");
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let line = json!({ "error": "usage", "message": e.to_string().trim_end() });
            let _ = writeln!(std::io::stderr(), "{line}");
            return 2;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            report(&e);
            1
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Schema(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Generate {
            scenes,
            out,
            kind,
            per_scene,
            seed,
            config,
            workers,
        } => {
            let config = match config {
                Some(p) => Config::load(&p)?,
                None => Config::default(),
            };
            let opts = GenerateOptions {
                scenes_dir: scenes,
                out_dir: out,
                types: kind.0,
                per_scene,
                master_seed: seed,
                config,
                workers,
            };
            let manifest = generate_dataset(&opts)?;
            for f in &manifest.failures {
                let line = json!({
                    "scene": f.scene, "type": f.kind, "camera_index": f.camera_index,
                    "error": f.error, "message": f.message,
                });
                let _ = writeln!(std::io::stderr(), "{line}");
            }
            let per_scene = manifest.images_per_scene();
            let empty: Vec<&String> = manifest.scenes.iter().filter(|s| !per_scene.contains_key(*s)).collect();
            println!(
                "{}",
                json!({ "images": manifest.images.len(), "failures": manifest.failures.len(), "scenes_without_images": empty })
            );
            Ok(if empty.is_empty() { 0 } else { 1 })
        }
        Command::Split {
            train,
            test,
            seed,
            manifest,
            scenes,
        } => {
            if let Some(path) = manifest {
                let mut m = DatasetManifest::load(&path)?;
                m.splits = Some(split_scenes(&m.scenes, train, test, seed)?);
                let leaks = check_leakage(&m)?;
                if !leaks.is_empty() {
                    return Err(Error::Schema(format!("scenes in both splits: {leaks:?}")));
                }
                m.save(&path)?;
                print_json(&m.splits)?;
            } else {
                let dir = scenes.expect("clap enforces one of --manifest/--scenes");
                let names = scene_files(&dir)?
                    .iter()
                    .map(|p| Scene::load(p).map(|s| s.name))
                    .collect::<Result<Vec<_>>>()?;
                print_json(&split_scenes(&names, train, test, seed)?)?;
            }
            Ok(0)
        }
        Command::Stats { manifest } => {
            let m = DatasetManifest::load(&manifest)?;
            let root = manifest.parent().unwrap_or_else(|| Path::new("."));
            print_json(&dataset_stats(&m, root)?)?;
            Ok(0)
        }
        Command::Score { image_meta } => {
            let meta = ImageMetadata::load(&image_meta)?;
            println!("{:?}", meta.recompute_score());
            Ok(0)
        }
        Command::Validate { scenes } => {
            let files = scene_files(&scenes)?;
            if files.is_empty() {
                return Err(Error::Schema(format!("no scene files in {}", scenes.display())));
            }
            let mut failed = 0;
            for path in files {
                match validate_scene_file(&path) {
                    Ok(scene) => println!(
                        "{}",
                        json!({ "file": path.display().to_string(), "ok": true, "objects": scene.objects().len() })
                    ),
                    Err(e) => {
                        failed += 1;
                        let line = json!({ "file": path.display().to_string(), "error": e.kind(), "message": e.to_string() });
                        let _ = writeln!(std::io::stderr(), "{line}");
                    }
                }
            }
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}

/// Schema check followed by a full load.
pub fn validate_scene_file(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    validate_json(SchemaKind::Scene, &value)?;
    Scene::load(path)
}
