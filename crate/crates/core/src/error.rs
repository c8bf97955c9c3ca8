use std::path::PathBuf;

use crate::perturb::ImplausibilityType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("mesh file not found: {0}")]
    MissingMesh(PathBuf),

    #[error("mesh {0} has no triangles after cleanup")]
    DegenerateGeometry(String),

    #[error("unknown object: {0}")]
    UnknownObject(String),

    #[error("invalid pose: {0}")]
    InvalidPose(String),

    #[error("no candidate objects")]
    NoCandidates,

    #[error("{kind} is not allowed for object {object}")]
    NotAllowed {
        object: String,
        kind: ImplausibilityType,
    },

    #[error("{kind} on {object} failed: {reason}")]
    TransformFailed {
        object: String,
        kind: ImplausibilityType,
        reason: String,
    },

    #[error("degenerate camera: {0}")]
    DegenerateCamera(String),

    #[error("generation failed for scene {scene}: {reason}")]
    GenerationFailed { scene: String, reason: String },

    #[error("need {requested} scenes but only {available} are available")]
    InsufficientScenes { requested: usize, available: usize },

    #[error("corrupt metadata {path}: {reason}")]
    CorruptMetadata { path: PathBuf, reason: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable tag used in CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Schema(_) => "schema_error",
            Error::MissingMesh(_) => "missing_mesh",
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::UnknownObject(_) => "unknown_object",
            Error::InvalidPose(_) => "invalid_pose",
            Error::NoCandidates => "no_candidates",
            Error::NotAllowed { .. } => "not_allowed",
            Error::TransformFailed { .. } => "transform_failed",
            Error::DegenerateCamera(_) => "degenerate_camera",
            Error::GenerationFailed { .. } => "generation_failed",
            Error::InsufficientScenes { .. } => "insufficient_scenes",
            Error::CorruptMetadata { .. } => "corrupt_metadata",
            Error::Config(_) => "config_error",
            Error::Image(_) => "image_error",
        }
    }
}
