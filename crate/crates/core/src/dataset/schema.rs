use serde_json::Value;

use crate::error::{Error, Result};

const SCENE: &str = include_str!("../../../../schemas/scene.schema.json");
const IMAGE_METADATA: &str = include_str!("../../../../schemas/image_metadata.schema.json");
const MANIFEST: &str = include_str!("../../../../schemas/manifest.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemaKind {
    Scene,
    ImageMetadata,
    Manifest,
}

impl SchemaKind {
    pub fn source(self) -> &'static str {
        match self {
            SchemaKind::Scene => SCENE,
            SchemaKind::ImageMetadata => IMAGE_METADATA,
            SchemaKind::Manifest => MANIFEST,
        }
    }
}

/// Checks `instance` against one of the shipped JSON schemas. The error
/// lists every violation with its instance path.
pub fn validate_json(kind: SchemaKind, instance: &Value) -> Result<()> {
    let schema: Value = serde_json::from_str(kind.source()).expect("shipped schema is valid JSON");
    let validator = jsonschema::validator_for(&schema).map_err(|e| Error::Schema(format!("schema: {e}")))?;
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{}: {e}", e.instance_path))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Schema(errors.join("; ")))
    }
}
