//! Procedural generation of implausible indoor scenes.
//!
//! A plausible 3D room is loaded from a JSON description plus OBJ meshes,
//! one of six implausibility operations is applied to up to five objects,
//! a camera that sees every change is searched for, and the scene is
//! rendered before and after each change together with per-image metadata
//! and a plausibility score.
//!
//! Module map:
//!
//! * [`scene`]: scene graph, meshes, on-top-of dependency tree.
//! * [`geometry`]: ray casting, mesh intersection, support drop, box unions.
//! * [`perturb`]: the implausibility operations and weighted object selection.
//! * [`camera`]: camera placement search with visibility validation.
//! * [`render`]: software rasterizer producing color and object-ID passes.
//! * [`dataset`]: per-scene image sequences, manifests, splits, statistics.

pub mod camera;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod math;
pub mod perturb;
pub mod render;
pub mod scene;

pub use camera::{CameraSpec, VisibilityReport};
pub use config::Config;
pub use error::{Error, Result};
pub use geometry::{Aabb, HitRecord, Ray, SceneIndex, ScreenBox};
pub use math::{Pose3, Vec3};
pub use perturb::{ImplausibilityType, SelectionState, TransformRecord};
pub use render::{PlausibilityScore, RenderOutput};
pub use scene::{Mesh, Scene, SceneObject, SizeCategory};
